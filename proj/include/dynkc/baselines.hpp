#pragma once

#include <vector>

#include "dynkc/hierarchy.hpp"

// Static reference algorithms and exact brute-force optima used by tests and
// the evaluation harness. All tie-breaks are by ascending insertion id so the
// outputs are reproducible.

namespace dynkc {

// Level family built by the static greedy pass: P_0 is the input, and P_i is a
// greedy maximal independent set of P_{i-1} under "distance <= 2^i", scanned
// in ascending id order. Parent of a dropped point is the smallest-id kept
// point within 2^i.
class StaticFamily final : public StateBackedFamily {
 public:
  StaticFamily(int d, Coord delta) : StateBackedFamily(d, delta) {}
  const PointRecord& parent_in_level(int i, const PointRecord& x) const override;

 private:
  friend StaticFamily static_good_family(int d, Coord delta, const std::vector<Point>& points);
};

// Builds the greedy family; ids are assigned in list order. Coordinates must
// be distinct and inside the box.
StaticFamily static_good_family(int d, Coord delta, const std::vector<Point>& points);

// Farthest-first traversal; first center is the first point, ties by index.
// center_cost(points, result) <= 2 * opt for every k.
std::vector<Point> gonzalez(const std::vector<Point>& points, std::size_t k);

struct ThresholdGuess {
  CostValue tau = 0.0;
  SqDist tau_sq = 0;
};

struct HochbaumShmoysResult {
  std::vector<Point> centers;
  ThresholdGuess guess;  // the first candidate radius whose MIS was small enough
};

// Guesses the optimum radius over the pairwise distances (ascending, plus 0);
// for each guess builds a greedy maximal independent set in the <=2*tau graph
// and returns the first one of size at most k.
HochbaumShmoysResult hochbaum_shmoys(const std::vector<Point>& points, std::size_t k);

// Exact optimum of the diameter k-clustering objective over all partitions
// into at most k nonempty parts (subset dynamic program). Guarded.
SqDist brute_force_opt_diam_sq(const std::vector<Point>& points, std::size_t k,
                               std::size_t size_guard = 14);
CostValue brute_force_opt_diam(const std::vector<Point>& points, std::size_t k,
                               std::size_t size_guard = 14);
// Optimum for every k in [1, n] in one pass.
std::vector<SqDist> brute_force_opt_diam_sq_all(const std::vector<Point>& points,
                                                std::size_t size_guard = 14);

// Exact k-center optimum with centers drawn from the point set (enumerates
// all k-subsets). Guarded.
SqDist brute_force_opt_center_sq(const std::vector<Point>& points, std::size_t k,
                                 std::size_t size_guard = 16);
CostValue brute_force_opt_center(const std::vector<Point>& points, std::size_t k,
                                 std::size_t size_guard = 16);

}  // namespace dynkc

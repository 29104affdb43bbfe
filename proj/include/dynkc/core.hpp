#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

// Core types for dynamic hierarchical clustering over the integer box
// {1,...,delta}^d with exact integer distance comparisons.

namespace dynkc {

using Coord = std::int64_t;
using Point = std::vector<Coord>;
using PointId = std::uint64_t;
using SqDist = unsigned __int128;
using CostValue = double;

inline constexpr std::uint32_t kNoSlot = std::numeric_limits<std::uint32_t>::max();

struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Mode { low_dim, high_dim };

struct Config {
  int d = 1;
  Coord delta = 1;
  Mode mode = Mode::low_dim;
  int ell = 1;                     // sampling chain length (high-dim)
  std::uint64_t seed = 0;
  double grid_count_factor = 10.0; // grids per level = ceil(factor * log2(n0))
  std::uint64_t n0_hint = 0;       // optional initial size snapshot (0 = default)

  // Throws std::invalid_argument on unusable parameter combinations.
  void validate() const;
};

// Number of levels above the base set: smallest M with 2^M >= sqrt(d)*(delta-1),
// and at least 1 whenever two distinct coordinates exist (delta >= 2). 0 for delta == 1.
int level_count(int d, Coord delta);

// Exact floor(sqrt(n)).
std::uint64_t isqrt_u128(SqDist n);

// Exact squared Euclidean distance. Throws on dimension mismatch.
SqDist squared_distance(const Point& p, const Point& q);

CostValue distance(const Point& p, const Point& q);

// Largest possible distance in the box, sqrt(d)*(delta-1).
CostValue max_possible_cost(int d, Coord delta);

// Max over clusters of the cluster diameter; the clusters must form a
// partition of `points` (distinct coordinates). Throws otherwise.
CostValue diameter_cost(const std::vector<Point>& points,
                        const std::vector<std::vector<Point>>& partition);
SqDist diameter_cost_sq(const std::vector<Point>& points,
                        const std::vector<std::vector<Point>>& partition);

// Max over points of the distance to the nearest center. Centers must be nonempty.
CostValue center_cost(const std::vector<Point>& points, const std::vector<Point>& centers);
SqDist center_cost_sq(const std::vector<Point>& points, const std::vector<Point>& centers);

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept;
};

std::string format_point(const Point& p);

// True iff every coordinate lies in [1, delta] and the dimension matches.
bool in_box(const Point& p, int d, Coord delta);

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

}  // namespace dynkc

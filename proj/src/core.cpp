#include "dynkc/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace dynkc {

void Config::validate() const {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (delta < 1) throw std::invalid_argument("delta must be >= 1");
  if (ell < 1) throw std::invalid_argument("ell must be >= 1");
  if (mode == Mode::high_dim && ell > 64)
    throw std::invalid_argument("ell out of supported range");
  if (grid_count_factor <= 0.0)
    throw std::invalid_argument("grid_count_factor must be positive");
  if (delta > (Coord(1) << 31))
    throw std::invalid_argument("delta out of supported range (<= 2^31)");
  // squared thresholds 4^M must fit the 128-bit comparison type
  int m = level_count(d, delta);
  if (m > 62) throw std::invalid_argument("sqrt(d)*(delta-1) too large");
}

int level_count(int d, Coord delta) {
  if (d < 1 || delta < 1) throw std::invalid_argument("level_count: bad arguments");
  if (delta == 1) return 0;
  // smallest M with 4^M >= d*(delta-1)^2, i.e. 2^M >= sqrt(d)*(delta-1)
  SqDist target = SqDist(delta - 1) * SqDist(delta - 1) * SqDist(d);
  int m = 1;
  while ((SqDist(1) << (2 * m)) < target) ++m;
  return m;
}

std::uint64_t isqrt_u128(SqDist n) {
  if (n == 0) return 0;
  long double approx = sqrtl(static_cast<long double>(n));
  std::uint64_t r = approx >= 18446744073709551615.0L
                        ? std::numeric_limits<std::uint64_t>::max()
                        : static_cast<std::uint64_t>(approx);
  while (r > 0 && SqDist(r) * SqDist(r) > n) --r;
  while (r < std::numeric_limits<std::uint64_t>::max() &&
         SqDist(r + 1) * SqDist(r + 1) <= n)
    ++r;
  return r;
}

SqDist squared_distance(const Point& p, const Point& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("squared_distance: dimension mismatch");
  SqDist acc = 0;
  for (std::size_t t = 0; t < p.size(); ++t) {
    Coord diff = p[t] >= q[t] ? p[t] - q[t] : q[t] - p[t];
    acc += SqDist(diff) * SqDist(diff);
  }
  return acc;
}

CostValue distance(const Point& p, const Point& q) {
  return static_cast<CostValue>(sqrtl(static_cast<long double>(squared_distance(p, q))));
}

CostValue max_possible_cost(int d, Coord delta) {
  return static_cast<CostValue>(
      sqrtl(static_cast<long double>(SqDist(delta - 1) * SqDist(delta - 1) * SqDist(d))));
}

namespace {

void check_partition(const std::vector<Point>& points,
                     const std::vector<std::vector<Point>>& partition) {
  std::map<Point, int> seen;
  std::size_t covered = 0;
  for (const auto& cluster : partition) {
    if (cluster.empty()) throw std::invalid_argument("partition contains an empty cluster");
    for (const auto& p : cluster) {
      if (++seen[p] > 1) throw std::invalid_argument("partition clusters are not disjoint");
      ++covered;
    }
  }
  if (covered != points.size())
    throw std::invalid_argument("partition does not cover the point set");
  for (const auto& p : points)
    if (seen.find(p) == seen.end())
      throw std::invalid_argument("partition does not cover the point set");
}

}  // namespace

SqDist diameter_cost_sq(const std::vector<Point>& points,
                        const std::vector<std::vector<Point>>& partition) {
  check_partition(points, partition);
  SqDist worst = 0;
  for (const auto& cluster : partition)
    for (std::size_t a = 0; a < cluster.size(); ++a)
      for (std::size_t b = a + 1; b < cluster.size(); ++b)
        worst = std::max(worst, squared_distance(cluster[a], cluster[b]));
  return worst;
}

CostValue diameter_cost(const std::vector<Point>& points,
                        const std::vector<std::vector<Point>>& partition) {
  return static_cast<CostValue>(
      sqrtl(static_cast<long double>(diameter_cost_sq(points, partition))));
}

SqDist center_cost_sq(const std::vector<Point>& points, const std::vector<Point>& centers) {
  if (centers.empty()) throw std::invalid_argument("center_cost: empty center set");
  SqDist worst = 0;
  for (const auto& p : points) {
    SqDist best = std::numeric_limits<SqDist>::max();
    for (const auto& c : centers) best = std::min(best, squared_distance(p, c));
    worst = std::max(worst, best);
  }
  return worst;
}

CostValue center_cost(const std::vector<Point>& points, const std::vector<Point>& centers) {
  return static_cast<CostValue>(
      sqrtl(static_cast<long double>(center_cost_sq(points, centers))));
}

std::size_t PointHash::operator()(const Point& p) const noexcept {
  std::uint64_t h = 0x2545f4914f6cdd1dULL;
  for (Coord c : p) h = detail::mix64(h ^ static_cast<std::uint64_t>(c));
  return static_cast<std::size_t>(h);
}

std::string format_point(const Point& p) {
  std::ostringstream os;
  os << '(';
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (t) os << ',';
    os << p[t];
  }
  os << ')';
  return os.str();
}

bool in_box(const Point& p, int d, Coord delta) {
  if (static_cast<int>(p.size()) != d) return false;
  for (Coord c : p)
    if (c < 1 || c > delta) return false;
  return true;
}

}  // namespace dynkc

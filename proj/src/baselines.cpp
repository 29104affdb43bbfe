#include "dynkc/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace dynkc {

const PointRecord& StaticFamily::parent_in_level(int i, const PointRecord& x) const {
  if (x.height >= i) return x;
  if (x.height == i - 1 && x.parent != kNoSlot) return st_.record(x.parent);
  throw NotFoundError("parent_in_level: no link stored");
}

StaticFamily static_good_family(int d, Coord delta, const std::vector<Point>& points) {
  StaticFamily fam(d, delta);
  std::vector<std::uint32_t> slots;
  slots.reserve(points.size());
  for (const auto& p : points) {
    if (!in_box(p, d, delta))
      throw std::invalid_argument("static_good_family: point outside the box");
    if (fam.st_.find(p))
      throw std::invalid_argument("static_good_family: duplicate coordinates");
    slots.push_back(fam.st_.create(p));
  }

  int m = fam.st_.level_top();
  // survivors of the previous level, ascending id (== list order)
  std::vector<std::uint32_t> prev = slots;
  for (int i = 1; i <= m; ++i) {
    SqDist thresh = SqDist(1) << (2 * i);
    std::vector<std::uint32_t> kept;
    for (std::uint32_t slot : prev) {
      PointRecord& rec = fam.st_.record(slot);
      std::uint32_t close = kNoSlot;
      for (std::uint32_t cand : kept) {
        if (squared_distance(rec.point, fam.st_.record(cand).point) <= thresh) {
          close = cand;
          break;  // kept is id-ascending, first hit has the smallest id
        }
      }
      if (close == kNoSlot) {
        kept.push_back(slot);
        fam.st_.set_height(slot, i);
      } else {
        rec.parent = close;
      }
    }
    prev = std::move(kept);
  }
  return fam;
}

std::vector<Point> gonzalez(const std::vector<Point>& points, std::size_t k) {
  if (k < 1 || k > points.size())
    throw std::invalid_argument("gonzalez: k out of range");
  std::vector<std::size_t> chosen{0};
  std::vector<SqDist> best(points.size(), std::numeric_limits<SqDist>::max());
  while (chosen.size() < k) {
    const Point& latest = points[chosen.back()];
    for (std::size_t i = 0; i < points.size(); ++i)
      best[i] = std::min(best[i], squared_distance(points[i], latest));
    std::size_t far = 0;
    SqDist far_d = 0;
    bool found = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      if (!found || best[i] > far_d) {
        far = i;
        far_d = best[i];
        found = true;
      }
    }
    chosen.push_back(far);
  }
  std::vector<Point> out;
  out.reserve(k);
  for (std::size_t i : chosen) out.push_back(points[i]);
  return out;
}

namespace {

// Greedy maximal independent set (ascending index) in the graph connecting
// points at squared distance <= limit_sq.
std::vector<std::size_t> greedy_mis(const std::vector<Point>& points, SqDist limit_sq) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool blocked = false;
    for (std::size_t j : kept)
      if (squared_distance(points[i], points[j]) <= limit_sq) {
        blocked = true;
        break;
      }
    if (!blocked) kept.push_back(i);
  }
  return kept;
}

}  // namespace

HochbaumShmoysResult hochbaum_shmoys(const std::vector<Point>& points, std::size_t k) {
  if (k < 1 || k > points.size())
    throw std::invalid_argument("hochbaum_shmoys: k out of range");
  std::vector<SqDist> guesses{0};
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = a + 1; b < points.size(); ++b)
      guesses.push_back(squared_distance(points[a], points[b]));
  std::sort(guesses.begin(), guesses.end());
  guesses.erase(std::unique(guesses.begin(), guesses.end()), guesses.end());

  for (SqDist tau_sq : guesses) {
    std::vector<std::size_t> mis = greedy_mis(points, 4 * tau_sq);
    if (mis.size() <= k) {
      HochbaumShmoysResult out;
      for (std::size_t i : mis) out.centers.push_back(points[i]);
      out.guess.tau_sq = tau_sq;
      out.guess.tau = static_cast<CostValue>(sqrtl(static_cast<long double>(tau_sq)));
      return out;
    }
  }
  throw std::logic_error("hochbaum_shmoys: no feasible guess");  // unreachable
}

std::vector<SqDist> brute_force_opt_diam_sq_all(const std::vector<Point>& points,
                                                std::size_t size_guard) {
  std::size_t n = points.size();
  if (n == 0) throw std::invalid_argument("brute_force_opt_diam: empty point set");
  if (n > size_guard)
    throw std::invalid_argument("brute_force_opt_diam: size guard exceeded");

  std::size_t full = (std::size_t(1) << n) - 1;
  std::vector<SqDist> diam(full + 1, 0);
  for (std::size_t s = 1; s <= full; ++s) {
    std::size_t low = s & (~s + 1);
    std::size_t rest = s ^ low;
    if (rest == 0) continue;
    std::size_t li = static_cast<std::size_t>(__builtin_ctzll(low));
    SqDist dmax = diam[rest];
    for (std::size_t j = 0; j < n; ++j)
      if (rest & (std::size_t(1) << j))
        dmax = std::max(dmax, squared_distance(points[li], points[j]));
    diam[s] = dmax;
  }

  constexpr SqDist kInf = std::numeric_limits<SqDist>::max();
  std::vector<SqDist> prev(full + 1, kInf), cur(full + 1, kInf);
  prev[0] = 0;
  std::vector<SqDist> result(n + 1, 0);
  for (std::size_t parts = 1; parts <= n; ++parts) {
    cur[0] = 0;
    for (std::size_t s = 1; s <= full; ++s) {
      SqDist best = prev[s];  // fewer parts already suffice
      std::size_t low = s & (~s + 1);
      // the part containing the lowest set bit, enumerated over submasks
      for (std::size_t sub = s; sub; sub = (sub - 1) & s) {
        if (!(sub & low)) continue;
        SqDist rest = prev[s ^ sub];
        if (rest == kInf) continue;
        best = std::min(best, std::max(diam[sub], rest));
      }
      cur[s] = best;
    }
    result[parts] = cur[full];
    std::swap(prev, cur);
  }
  result.erase(result.begin());  // index by k-1
  return result;
}

SqDist brute_force_opt_diam_sq(const std::vector<Point>& points, std::size_t k,
                               std::size_t size_guard) {
  if (k < 1 || k > points.size())
    throw std::invalid_argument("brute_force_opt_diam: k out of range");
  return brute_force_opt_diam_sq_all(points, size_guard)[k - 1];
}

CostValue brute_force_opt_diam(const std::vector<Point>& points, std::size_t k,
                               std::size_t size_guard) {
  return static_cast<CostValue>(
      sqrtl(static_cast<long double>(brute_force_opt_diam_sq(points, k, size_guard))));
}

SqDist brute_force_opt_center_sq(const std::vector<Point>& points, std::size_t k,
                                 std::size_t size_guard) {
  std::size_t n = points.size();
  if (n == 0) throw std::invalid_argument("brute_force_opt_center: empty point set");
  if (n > size_guard)
    throw std::invalid_argument("brute_force_opt_center: size guard exceeded");
  if (k < 1 || k > n) throw std::invalid_argument("brute_force_opt_center: k out of range");

  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  SqDist best = std::numeric_limits<SqDist>::max();
  while (true) {
    SqDist worst = 0;
    for (std::size_t i = 0; i < n; ++i) {
      SqDist near = std::numeric_limits<SqDist>::max();
      for (std::size_t c : pick)
        near = std::min(near, squared_distance(points[i], points[c]));
      worst = std::max(worst, near);
      if (worst >= best) break;
    }
    best = std::min(best, worst);
    // next combination
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

CostValue brute_force_opt_center(const std::vector<Point>& points, std::size_t k,
                                 std::size_t size_guard) {
  return static_cast<CostValue>(
      sqrtl(static_cast<long double>(brute_force_opt_center_sq(points, k, size_guard))));
}

}  // namespace dynkc

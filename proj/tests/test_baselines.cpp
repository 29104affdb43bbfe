#include <algorithm>
#include <functional>

#include "doctest.h"
#include "dynkc/baselines.hpp"
#include "test_util.hpp"

using namespace dynkc;
using testutil::pt;

namespace {

const std::vector<Point> kLine{pt({1}), pt({2}), pt({5}), pt({9})};

// Independent oracle: literal enumeration of all partitions into at most k
// nonempty parts (restricted growth strings). Small n only.
SqDist enum_opt_diam_sq(const std::vector<Point>& pts, std::size_t k) {
  std::size_t n = pts.size();
  std::vector<std::size_t> part(n, 0);
  SqDist best = std::numeric_limits<SqDist>::max();
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (i == n) {
      SqDist worst = 0;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
          if (part[a] == part[b])
            worst = std::max(worst, squared_distance(pts[a], pts[b]));
      best = std::min(best, worst);
      return;
    }
    for (std::size_t c = 0; c < std::min(used + 1, k); ++c) {
      part[i] = c;
      rec(i + 1, std::max(used, c + 1));
    }
  };
  rec(0, 0);
  return best;
}

std::vector<Point> member_points(const FamilyView& fam, int level) {
  std::vector<Point> out;
  for (const PointRecord* r : fam.level_members(level)) out.push_back(r->point);
  return out;
}

}  // namespace

TEST_CASE("static family on the line instance") {
  StaticFamily fam = static_good_family(1, 9, kLine);
  CHECK(fam.level_top() == 3);
  CHECK(member_points(fam, 0) == std::vector<Point>{pt({1}), pt({2}), pt({5}), pt({9})});
  CHECK(member_points(fam, 1) == std::vector<Point>{pt({1}), pt({5}), pt({9})});
  CHECK(member_points(fam, 2) == std::vector<Point>{pt({1}), pt({9})});
  CHECK(member_points(fam, 3) == std::vector<Point>{pt({1})});
  CHECK(validate_family(fam, 1.0).empty());
  // parents: 2 -> 1 at level 1, 5 -> 1 at level 2, 9 -> 1 at level 3
  const PointRecord* two = fam.find(pt({2}));
  CHECK(fam.parent_in_level(1, *two).point == pt({1}));
  const PointRecord* five = fam.find(pt({5}));
  CHECK(fam.parent_in_level(2, *five).point == pt({1}));
}

TEST_CASE("static family on a single point") {
  StaticFamily fam = static_good_family(2, 16, {pt({7, 3})});
  for (int i = 0; i <= fam.level_top(); ++i) CHECK(fam.level_size(i) == 1);
  CHECK(validate_family(fam, 1.0).empty());
}

TEST_CASE("static family can realize the two-pair-two-single topology") {
  // Six labeled points: {1,4} drop at level 1, {3,6} at level 2, 2 at level 3,
  // leaving 5 on top. Insertion order fixes the ids so the greedy makes
  // exactly these choices.
  Point l1 = pt({2}), l2 = pt({1}), l3 = pt({4}), l4 = pt({5}), l5 = pt({9}), l6 = pt({12});
  std::vector<Point> order{l5, l2, l3, l6, l1, l4};  // ids 1..6
  StaticFamily fam = static_good_family(1, 16, order);
  CHECK(member_points(fam, 1) == std::vector<Point>{l5, l2, l3, l6});
  CHECK(member_points(fam, 2) == std::vector<Point>{l5, l2});
  CHECK(member_points(fam, 3) == std::vector<Point>{l5});
  CHECK(fam.parent_in_level(1, *fam.find(l1)).point == l2);
  CHECK(fam.parent_in_level(1, *fam.find(l4)).point == l3);
  CHECK(fam.parent_in_level(2, *fam.find(l3)).point == l2);
  CHECK(fam.parent_in_level(2, *fam.find(l6)).point == l5);
  CHECK(fam.parent_in_level(3, *fam.find(l2)).point == l5);
  CHECK(validate_family(fam, 1.0).empty());
}

TEST_CASE("static family validates on random instances") {
  std::mt19937_64 rng(29);
  for (int it = 0; it < 50; ++it) {
    int d = static_cast<int>(rng() % 3) + 1;
    Coord delta = Coord(8) << (rng() % 3);
    std::size_t n = rng() % 12 + 1;
    auto pts = testutil::random_distinct_points(rng, d, delta, n);
    StaticFamily fam = static_good_family(d, delta, pts);
    CHECK(validate_family(fam, 1.0).empty());
  }
}

TEST_CASE("gonzalez on the line instance") {
  CHECK(gonzalez(kLine, 2) == std::vector<Point>{pt({1}), pt({9})});
  CHECK(center_cost(kLine, gonzalez(kLine, 2)) == 4.0);
  CHECK(center_cost(kLine, gonzalez(kLine, 4)) == 0.0);
  CHECK(gonzalez(kLine, 1) == std::vector<Point>{pt({1})});
  CHECK(center_cost(kLine, gonzalez(kLine, 1)) == 8.0);
  CHECK_THROWS_AS(gonzalez(kLine, 0), std::invalid_argument);
  CHECK_THROWS_AS(gonzalez(kLine, 5), std::invalid_argument);
}

TEST_CASE("hochbaum-shmoys on the line instance") {
  auto r2 = hochbaum_shmoys(kLine, 2);
  CHECK(r2.centers == std::vector<Point>{pt({1}), pt({9})});
  // first feasible guess is an actual pairwise distance
  CHECK(r2.guess.tau == 3.0);
  CHECK(center_cost(kLine, r2.centers) <= 2.0 * brute_force_opt_center(kLine, 2));

  auto rall = hochbaum_shmoys(kLine, 4);
  CHECK(rall.guess.tau == 0.0);
  CHECK(rall.centers == kLine);

  auto r1 = hochbaum_shmoys(kLine, 1);
  CHECK(r1.centers.size() == 1);
  CHECK(center_cost(kLine, r1.centers) <= 2.0 * brute_force_opt_center(kLine, 1));
}

TEST_CASE("brute force diameter optimum") {
  CHECK(brute_force_opt_diam(kLine, 2) == 4.0);
  CHECK(brute_force_opt_diam(kLine, 4) == 0.0);
  CHECK(brute_force_opt_diam(kLine, 3) == 1.0);
  CHECK_THROWS_AS(brute_force_opt_diam(kLine, 0), std::invalid_argument);
  std::vector<Point> big(15, pt({1}));
  CHECK_THROWS_AS(brute_force_opt_diam_sq_all(big), std::invalid_argument);
}

TEST_CASE("brute force center optimum") {
  CHECK(brute_force_opt_center(kLine, 2) == 3.0);  // centers {2, 9}
  CHECK(brute_force_opt_center(kLine, 4) == 0.0);
  CHECK(brute_force_opt_center(kLine, 1) == 4.0);  // best single center is 5
  std::vector<Point> big(17, pt({1}));
  CHECK_THROWS_AS(brute_force_opt_center_sq(big, 1), std::invalid_argument);
}

TEST_CASE("subset DP agrees with literal partition enumeration") {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 40; ++it) {
    int d = static_cast<int>(rng() % 2) + 1;
    std::size_t n = rng() % 7 + 2;
    auto pts = testutil::random_distinct_points(rng, d, 24, n);
    auto all = brute_force_opt_diam_sq_all(pts);
    for (std::size_t k = 1; k <= n; ++k) CHECK(all[k - 1] == enum_opt_diam_sq(pts, k));
  }
}

TEST_CASE("the 2-approximation baselines meet their guarantee") {
  std::mt19937_64 rng(37);
  for (int it = 0; it < 60; ++it) {
    int d = static_cast<int>(rng() % 3) + 1;
    std::size_t n = rng() % 10 + 2;
    auto pts = testutil::random_distinct_points(rng, d, 32, n);
    for (std::size_t k = 1; k <= n; ++k) {
      SqDist opt = brute_force_opt_center_sq(pts, k);
      SqDist gon = center_cost_sq(pts, gonzalez(pts, k));
      SqDist hs = center_cost_sq(pts, hochbaum_shmoys(pts, k).centers);
      CHECK(gon <= 4 * opt);
      CHECK(hs <= 4 * opt);
      // diameter and center optima sandwich each other
      SqDist od = brute_force_opt_diam_sq(pts, k);
      CHECK(od >= opt);
      CHECK(od <= 4 * opt);
    }
  }
}

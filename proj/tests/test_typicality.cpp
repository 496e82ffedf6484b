#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "strata/typicality.hpp"

using namespace strata;
using doctest::Approx;

namespace {

// M3 sequence with `diag` diagonal points followed by atoms.
std::vector<Point> m3_points(std::size_t n, std::size_t diag) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    pts.push_back(i < diag ? Point{t, t} : Point{0.25, 0.75});
  }
  return pts;
}

std::vector<Label> labels_from_counts(std::span<const std::size_t> counts) {
  std::vector<Label> y;
  for (std::size_t a = 0; a < counts.size(); ++a) y.insert(y.end(), counts[a], static_cast<Label>(a));
  return y;
}

}  // namespace

TEST_CASE("weak log score examples") {
  auto m1 = fixtures::m1();
  RandomStream s(1, 1);
  const auto seq = sample(m1, s, 37);
  CHECK(weak_log_score(m1, seq.points) == Approx(std::log(2.0)).epsilon(1e-14));

  auto m3 = fixtures::m3();
  std::vector<Point> two{{0.25, 0.75}, {0.4, 0.4}};
  CHECK(weak_log_score(m3, two) == Approx(oracle::kM3Entropy).epsilon(1e-14));

  std::vector<Point> off{{0.25, 0.75}, {0.4, 0.5}};
  CHECK(weak_log_score(m3, off) == std::numeric_limits<double>::infinity());
  CHECK_FALSE(is_weakly_typical(m3, off, 1e9));
}

TEST_CASE("weak typicality examples") {
  auto m1 = fixtures::m1();
  RandomStream s(1, 2);
  CHECK(is_weakly_typical(m1, sample(m1, s, 100).points, 0.01));
  auto m3 = fixtures::m3();
  CHECK(is_weakly_typical(m3, m3_points(100, 50), 0.1));
  CHECK_FALSE(is_weakly_typical(m3, m3_points(100, 100), 0.1));
  // Balanced counts meet delta = 0 exactly.
  CHECK(is_weakly_typical(m3, m3_points(100, 50), 0.0));
  CHECK_FALSE(is_weakly_typical(m3, m3_points(100, 51), 0.0));
}

TEST_CASE("weak typicality matches the affine score formula for every count") {
  auto m3 = fixtures::m3();
  for (std::size_t k = 0; k <= 60; ++k) {
    CAPTURE(k);
    CHECK(is_weakly_typical(m3, m3_points(60, k), 0.05) == oracle::m3_weakly_typical(60, static_cast<int>(k), 0.05));
  }
}

TEST_CASE("weak log score is exactly permutation invariant") {
  auto m = fixtures::strata_3d();
  RandomStream s(8, 0);
  for (int t = 0; t < 200; ++t) {
    auto pts = sample(m, s, 64).points;
    const double before = weak_log_score(m, pts);
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[static_cast<std::size_t>(s.uniform() * i)]);
    std::vector<Point> shuffled;
    for (auto i : perm) shuffled.push_back(pts[i]);
    CHECK(weak_log_score(m, shuffled) == before);
  }
}

TEST_CASE("empirical types") {
  std::vector<Label> y{0, 1, 1};
  auto t = empirical_type(y, 2);
  CHECK(t.counts == std::vector<std::size_t>{1, 2});
  CHECK(t.pmf[0] == Approx(1.0 / 3.0));
  CHECK(t.pmf[1] == Approx(2.0 / 3.0));
  std::vector<Label> ones(5, 0);
  CHECK(empirical_type(ones, 3).pmf == std::vector<double>{1.0, 0.0, 0.0});
  std::vector<Label> yy = y;
  yy.insert(yy.end(), y.begin(), y.end());
  CHECK(empirical_type(yy, 2).pmf == t.pmf);
}

TEST_CASE("strong typicality examples") {
  const std::vector<double> half{0.5, 0.5};
  std::vector<std::size_t> c1{50, 50}, c2{70, 30};
  CHECK(is_strongly_typical(type_from_counts(c1), half, 0.1));
  CHECK_FALSE(is_strongly_typical(type_from_counts(c2), half, 0.1));
  // Boundary: |P - Q| = η is not strictly less.
  std::vector<std::size_t> c3{60, 40};
  CHECK_FALSE(is_strongly_typical(type_from_counts(c3), half, 0.1));
  std::vector<std::size_t> c5{3, 1};
  CHECK_FALSE(is_strongly_typical(type_from_counts(c5), half, 0.25));
  CHECK(is_strongly_typical(type_from_counts(c5), half, 0.2500001));
  // P << Q fails.
  const std::vector<double> q{0.0, 1.0};
  std::vector<std::size_t> c4{1, 99};
  CHECK_FALSE(is_strongly_typical(type_from_counts(c4), q, 100.0));
}

TEST_CASE("strong typicality depends only on the type") {
  RandomStream s(3, 3);
  const std::vector<double> q{0.2, 0.3, 0.5};
  for (int t = 0; t < 500; ++t) {
    std::vector<Label> y(40);
    for (auto& a : y) a = static_cast<Label>(s.categorical(std::vector<double>{0.2, 0.5, 1.0}));
    const auto type = empirical_type(y, 3);
    CHECK(is_strongly_typical(y, q, 0.1) == is_strongly_typical(type, q, 0.1));
    CHECK(is_strongly_typical(labels_from_counts(type.counts), q, 0.1) == is_strongly_typical(y, q, 0.1));
  }
}

TEST_CASE("schedule values") {
  auto s = schedule(100, 0.1, 2);
  auto o = oracle::schedule(100, 0.1, 2);
  CHECK(s.eta == Approx(0.15849).epsilon(1e-4));
  CHECK(s.delta_prime == Approx(0.5839).epsilon(1e-4));
  CHECK(s.epsilon == Approx(0.0263).epsilon(1e-3));
  CHECK(s.eta == Approx(o.eta).epsilon(1e-14));
  CHECK(s.delta_prime == Approx(o.delta_prime).epsilon(1e-14));
  CHECK(s.epsilon == Approx(o.epsilon).epsilon(1e-14));
  auto big = schedule(10000, 0.1, 2);
  CHECK(big.eta == Approx(0.02512).epsilon(1e-3));
  CHECK(big.eta < s.eta);
  CHECK(big.epsilon < s.epsilon);
  CHECK(std::sqrt(10000.0) * big.eta > std::sqrt(100.0) * s.eta);
  CHECK_THROWS_AS(schedule(100, 0.0, 2), Error);
  CHECK_THROWS_AS(schedule(100, 0.5, 2), Error);
}

TEST_CASE("schedule monotonicity over n") {
  for (double xi : {0.05, 0.1, 0.3, 0.45}) {
    double prev_eta = 2.0, prev_root = 0.0;
    for (std::size_t n = 1; n <= 100000; n *= 3) {
      auto s = schedule(n, xi, 3);
      CHECK(s.eta < prev_eta);
      CHECK(std::sqrt(static_cast<double>(n)) * s.eta > prev_root);
      prev_eta = s.eta;
      prev_root = std::sqrt(static_cast<double>(n)) * s.eta;
    }
  }
}

TEST_CASE("stratum dimension examples") {
  const std::vector<int> dims{0, 1};
  CHECK(stratum_dimension(std::vector<Label>{0, 1, 1}, dims) == 2);
  CHECK(stratum_dimension(std::vector<Label>{0, 0, 0}, dims) == 0);
  CHECK(stratum_dimension(std::vector<Label>{1, 0, 1, 1}, dims) == 3);
}

TEST_CASE("dimension intervals") {
  const std::vector<double> q{0.5, 0.5};
  auto a = dimension_interval(100, 0.1, q, std::vector<int>{0, 1}, IntervalMode::Derived);
  auto b = dimension_interval(100, 0.1, q, std::vector<int>{0, 1}, IntervalMode::Literal);
  CHECK(a.lo == Approx(34.15).epsilon(1e-3));
  CHECK(a.hi == Approx(65.85).epsilon(1e-3));
  CHECK(b.lo == Approx(a.lo));
  auto c = dimension_interval(100, 0.1, q, std::vector<int>{0, 2}, IntervalMode::Derived);
  auto d = dimension_interval(100, 0.1, q, std::vector<int>{0, 2}, IntervalMode::Literal);
  CHECK(c.hi - 100.0 == Approx(31.70).epsilon(1e-3));
  CHECK(d.hi - 100.0 == Approx(15.85).epsilon(1e-3));
  auto e = dimension_interval(100, 0.1, std::vector<double>{1.0}, std::vector<int>{2}, IntervalMode::Derived);
  CHECK(e.lo == 200.0);
  CHECK(e.hi == 200.0);
}

TEST_CASE("every strongly typical type has its dimension in the derived interval") {
  // Full enumeration of types for k = 3 at small n.
  const std::vector<double> q{0.2, 0.3, 0.5};
  const std::vector<int> dims{0, 1, 3};
  for (std::size_t n : {5u, 10u, 20u}) {
    const auto s = schedule(n, 0.1, 3);
    const auto iv = dimension_interval(n, 0.1, q, dims, IntervalMode::Derived);
    for (std::size_t a = 0; a <= n; ++a) {
      for (std::size_t b = 0; a + b <= n; ++b) {
        const std::vector<std::size_t> counts{a, b, n - a - b};
        const auto y = labels_from_counts(counts);
        if (!is_strongly_typical(y, q, s.eta)) continue;
        CHECK(iv.contains(static_cast<double>(stratum_dimension(y, dims))));
      }
    }
  }
}

TEST_CASE("stratum dimension is permutation invariant") {
  std::vector<Label> y{2, 0, 1, 1, 2, 0, 2};
  const std::vector<int> dims{0, 1, 3};
  const auto m = stratum_dimension(y, dims);
  std::sort(y.begin(), y.end());
  do {
    CHECK(stratum_dimension(y, dims) == m);
  } while (std::next_permutation(y.begin(), y.end()));
}

TEST_CASE("entropy-TV bound examples") {
  const std::vector<double> half{0.5, 0.5};
  auto same = entropy_tv_bound(half, half);
  CHECK(same.theta == 0.0);
  CHECK(same.bound == 0.0);
  CHECK(same.holds.value());
  auto r = entropy_tv_bound(std::vector<double>{0.6, 0.4}, half);
  CHECK(r.theta == Approx(0.2));
  CHECK(r.bound == Approx(0.4605).epsilon(1e-4));
  CHECK(r.entropy_gap == Approx(0.0201).epsilon(1e-2));
  CHECK(r.holds.value());
  auto far = entropy_tv_bound(std::vector<double>{1.0, 0.0}, half);
  CHECK_FALSE(far.holds.has_value());
}

TEST_CASE("strongly typical types satisfy the label entropy bound") {
  RandomStream s(99, 0);
  const std::vector<double> q{0.1, 0.2, 0.3, 0.4};
  const double eta = 0.05;
  int checked = 0;
  while (checked < 10000) {
    std::vector<double> p(4);
    double sum = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      p[a] = std::max(0.0, q[a] + (2.0 * s.uniform() - 1.0) * eta);
      sum += p[a];
    }
    for (auto& v : p) v /= sum;
    bool typical = true;
    for (std::size_t a = 0; a < 4; ++a) typical &= std::abs(p[a] - q[a]) < eta;
    if (!typical) continue;
    ++checked;
    auto r = entropy_tv_bound(p, q);
    REQUIRE(r.holds.has_value());
    CHECK(r.entropy_gap <= -4.0 * eta * std::log(eta));
  }
}

TEST_CASE("schedule delta' covers every strongly typical type") {
  const std::vector<double> q{0.5, 0.5};
  for (std::size_t n : {50u, 100u, 1000u}) {
    const auto s = schedule(n, 0.1, 2);
    for (std::size_t k = 0; k <= n; ++k) {
      std::vector<std::size_t> counts{k, n - k};
      const auto t = type_from_counts(counts);
      if (!is_strongly_typical(t, q, s.eta)) continue;
      CHECK(std::abs(shannon_entropy(t.pmf) - std::log(2.0)) <= s.delta_prime);
    }
  }
}

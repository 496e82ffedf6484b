#include <cmath>
#include <limits>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "strata/measure.hpp"

using namespace strata;
using doctest::Approx;

namespace {

ErrorCode build_error(std::vector<WeightedShape> specs) {
  try {
    build_standard_form(specs);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected build_standard_form to throw");
  return ErrorCode::PreconditionViolation;
}

bool has_code(const std::vector<Diagnostic>& d, ErrorCode code) {
  return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.code == code; });
}

}  // namespace

TEST_CASE("standard form merges equal dimensions and renormalizes") {
  auto m = fixtures::build({{0.3, fixtures::segment({0.0, 0.0}, {1.0, 0.0})},
                            {0.2, fixtures::segment({0.0, 0.5}, {1.0, 0.5})},
                            {0.5, make_box({0.0, 0.0}, {1.0, 1.0})}});
  REQUIRE(m.size() == 2);
  CHECK(m.weights()[0] == Approx(0.5).epsilon(1e-15));
  CHECK(m.weights()[1] == Approx(0.5).epsilon(1e-15));
  CHECK(m.dimensions() == std::vector<int>{1, 2});
  const auto& seg = m.components()[0];
  REQUIRE(seg.pieces.size() == 2);
  CHECK(seg.inner_weights[0] == Approx(0.6).epsilon(1e-15));
  CHECK(seg.inner_weights[1] == Approx(0.4).epsilon(1e-15));
}

TEST_CASE("standard form orders components by dimension") {
  auto m = fixtures::build({{0.5, make_box({0.0}, {1.0})}, {0.5, fixtures::atom({2.0})}});
  CHECK(m.dimensions() == std::vector<int>{0, 1});
  CHECK(m.weights() == std::vector<double>{0.5, 0.5});
}

TEST_CASE("single component is a plain rectifiable measure") {
  auto m = fixtures::unit_interval();
  CHECK(m.size() == 1);
  CHECK(m.weights() == std::vector<double>{1.0});
}

TEST_CASE("standard form errors") {
  CHECK(build_error({{0.0, fixtures::atom({0.1})}, {1.0, fixtures::segment({0.0}, {1.0})}}) == ErrorCode::ZeroWeight);
  CHECK(build_error({{0.6, fixtures::atom({0.1})}, {0.6, fixtures::segment({0.0}, {1.0})}}) ==
        ErrorCode::WeightSumMismatch);
  CHECK(build_error({{0.5, fixtures::segment({0.0}, {0.6})}, {0.5, fixtures::segment({0.4}, {1.0})}}) ==
        ErrorCode::OverlappingCarriers);
  CHECK(build_error({{0.5, fixtures::atom({0.1})}, {0.5, fixtures::segment({0.0, 0.0}, {1.0, 0.0})}}) ==
        ErrorCode::AmbientMismatch);
  CHECK(build_error({{1.0, fixtures::segment({0.3}, {0.3})}}) == ErrorCode::InvalidComponent);
}

TEST_CASE("validator lists every violation") {
  std::vector<WeightedShape> specs{{0.6, fixtures::segment({0.0}, {0.6})}, {0.6, fixtures::segment({0.4}, {1.0})}};
  auto d = validate_components(specs);
  CHECK(has_code(d, ErrorCode::WeightSumMismatch));
  CHECK(has_code(d, ErrorCode::OverlappingCarriers));
  std::vector<WeightedShape> ok{{0.5, fixtures::atom({0.5})}, {0.5, fixtures::segment({0.0}, {1.0})}};
  CHECK(validate_components(ok).empty());
}

TEST_CASE("carrier overlap decisions") {
  // Segments touching at one point, or crossing, share a null set only.
  CHECK_FALSE(shape::overlaps(fixtures::segment({0.0}, {0.5}), fixtures::segment({0.5}, {1.0})).value());
  CHECK_FALSE(
      shape::overlaps(fixtures::segment({0.0, 0.0}, {1.0, 1.0}), fixtures::segment({0.0, 1.0}, {1.0, 0.0})).value());
  CHECK(shape::overlaps(fixtures::segment({0.0, 0.0}, {1.0, 1.0}), fixtures::segment({0.5, 0.5}, {2.0, 2.0})).value());
  CHECK(shape::overlaps(make_box({0.0, 0.0}, {1.0, 1.0}), make_box({0.5, 0.5}, {2.0, 2.0})).value());
  CHECK_FALSE(shape::overlaps(make_box({0.0, 0.0}, {1.0, 1.0}), make_box({1.0, 0.0}, {2.0, 1.0})).value());
  CHECK(shape::overlaps(fixtures::atom({0.3}), AtomSet{{{0.3}, {0.9}}, {0.5, 0.5}}).value());
}

TEST_CASE("log_density on M1") {
  auto m = fixtures::m1();
  const double x1[] = {0.5}, x2[] = {0.3}, x3[] = {2.0};
  CHECK(log_density(m, x1) == Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(log_density(m, x2) == Approx(std::log(0.5)).epsilon(1e-15));
  CHECK(log_density(m, x3) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("log_density equals q_i times the local density") {
  auto m = fixtures::strata_3d();
  RandomStream s(42, 0);
  for (int t = 0; t < 2000; ++t) {
    const auto y = static_cast<Label>(s.categorical(m.label_cdf()));
    const auto x = sample_component(m, y, s);
    const auto f = m.components()[y].local_density(x);
    REQUIRE(f.has_value());
    CHECK(std::exp(log_density(m, x)) == Approx(m.weights()[y] * *f).epsilon(1e-12));
  }
}

TEST_CASE("local densities of catalog shapes") {
  const double mid[] = {0.5, 0.5};
  CHECK(*shape::local_density(fixtures::segment({0.0, 0.0}, {1.0, 1.0}), mid) ==
        Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  DensityGrid g{{{0.0, 0.25, 1.0}}, {0.5, 0.5}};
  const auto seg = fixtures::segment({0.0}, {2.0}, g);
  const double a[] = {0.2}, b[] = {1.0}, off[] = {2.5};
  CHECK(*shape::local_density(seg, a) == Approx(1.0).epsilon(1e-15));        // 0.5 / (0.25 * 2)
  CHECK(*shape::local_density(seg, b) == Approx(1.0 / 3.0).epsilon(1e-15));  // 0.5 / (0.75 * 2)
  CHECK_FALSE(shape::local_density(seg, off).has_value());
  CHECK(shape::carrier_measure(make_box({0.0, 0.0, 0.0}, {2.0, 0.5, 1.0})) == Approx(1.0));
}

TEST_CASE("sampling M1") {
  auto m = fixtures::m1();
  RandomStream s(2024, 1);
  const auto seq = sample(m, s, 10000);
  double ones = 0.0;
  for (auto y : seq.labels) ones += (y == 1);
  CHECK(std::abs(ones / 10000.0 - 0.5) <= 0.015);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    CHECK(log_density(m, seq.points[i]) > -std::numeric_limits<double>::infinity());
    CHECK(m.locate(seq.points[i]) == seq.labels[i]);
  }
}

TEST_CASE("sampling is deterministic per (seed, stream)") {
  auto m = fixtures::strata_3d();
  RandomStream a(9, 3), b(9, 3), c(9, 4);
  const auto x = sample(m, a, 500), y = sample(m, b, 500), z = sample(m, c, 500);
  CHECK(x.points == y.points);
  CHECK(x.labels == y.labels);
  CHECK(x.points != z.points);
}

TEST_CASE("label frequencies obey Hoeffding at 10^4 samples") {
  auto m = fixtures::strata_3d();
  RandomStream s(77, 0);
  const std::size_t n = 10000;
  const auto seq = sample(m, s, n);
  std::vector<double> freq(m.size(), 0.0);
  for (auto y : seq.labels) freq[y] += 1.0 / n;
  // P(|freq - q| >= t) <= 2 exp(-2 n t^2) = 1e-6 per label.
  const double t = std::sqrt(std::log(2.0 / 1e-6) / (2.0 * n));
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(std::abs(freq[i] - m.weights()[i]) < t);
}

TEST_CASE("component entropies") {
  CHECK(component_entropy(fixtures::unit_interval().components()[0]) == Approx(0.0));
  CHECK(component_entropy(fixtures::diagonal().components()[0]) == Approx(fixtures::kLnSqrt2).epsilon(1e-12));
  CHECK(component_entropy(fixtures::three_atoms().components()[0]) == Approx(1.0397207708399179).epsilon(1e-12));
  DensityGrid g{{{0.0, 0.5, 1.0}, {0.0, 1.0}}, {0.25, 0.75}};
  auto patch = RectifiableComponent::single(AxisPatch{{0.0, 0.0}, {0, 1}, {0.5, 1.0}, g, std::nullopt});
  // densities 0.25/0.25 = 1 and 0.75/0.25 = 3
  CHECK(component_entropy(patch) == Approx(-(0.25 * std::log(1.0) + 0.75 * std::log(3.0))).epsilon(1e-12));
}

TEST_CASE("mixture entropy and the chain rule") {
  auto h1 = mixture_entropy(fixtures::m1());
  CHECK(h1.total == Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(h1.labels == Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(h1.conditional == Approx(0.0));
  auto h0 = mixture_entropy(fixtures::unit_interval());
  CHECK(h0.total == 0.0);
  CHECK(h0.labels == 0.0);
  auto h3 = mixture_entropy(fixtures::m3());
  CHECK(std::abs(h3.total - oracle::kM3Entropy) < 1e-12);
  auto hs = mixture_entropy(fixtures::strata_3d());
  CHECK(std::abs(hs.total - (hs.labels + hs.conditional)) < 1e-12);
}

TEST_CASE("Monte Carlo entropy") {
  RandomStream s(5, 0);
  auto e1 = entropy_monte_carlo(fixtures::m1(), s, 100000);
  CHECK(e1.estimate == Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(e1.standard_error == 0.0);
  auto e3 = entropy_monte_carlo(fixtures::m3(), s, 100000);
  CHECK(std::abs(e3.estimate - oracle::kM3Entropy) <= 3.0 * e3.standard_error);
  CHECK_THROWS_AS(entropy_monte_carlo(fixtures::m3(), s, 1), Error);
}

TEST_CASE("Monte Carlo entropy covers H within 4 SE in at least 99% of seeded runs") {
  const auto measures = {fixtures::m3(), fixtures::strata_3d(), fixtures::three_atoms()};
  for (const auto& m : measures) {
    const double h = mixture_entropy(m).total;
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      RandomStream s(seed, 17);
      auto e = entropy_monte_carlo(m, s, 2000);
      covered += std::abs(e.estimate - h) <= 4.0 * e.standard_error;
    }
    CHECK(covered >= 99);
  }
}

TEST_CASE("off-support points are located nowhere") {
  auto m = fixtures::m3();
  const double off[] = {0.3, 0.6}, on[] = {0.3, 0.3}, atom[] = {0.25, 0.75};
  CHECK_FALSE(m.locate(off).has_value());
  CHECK(m.locate(on) == Label{1});
  CHECK(m.locate(atom) == Label{0});
}

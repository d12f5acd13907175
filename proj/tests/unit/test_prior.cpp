#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "mppseg/prior.hpp"

using namespace mppseg;

TEST_SUITE("prior") {
  TEST_CASE("rotation density integrates to one") {
    int n = 200000;
    double h = kPi / n, half = 0, full = 0;
    for (int i = 0; i < n; ++i) half += rotation_density((i + 0.5) * h) * h;
    for (int i = 0; i < 2 * n; ++i) full += rotation_density_full(-kPi + (i + 0.5) * h) * h;
    CHECK(half == doctest::Approx(1).epsilon(1e-8));
    CHECK(full == doctest::Approx(1).epsilon(1e-8));
    CHECK(rotation_density(0) == 0);
    CHECK(rotation_density(kPi + 0.1) == 0);
    CHECK(rotation_cdf(kPi) == doctest::Approx(1));
  }

  TEST_CASE("rotation draws follow the density") {
    Rng rng = Rng::stream(4, "t-rot");
    int n = 100000, near = 0;
    for (int i = 0; i < n; ++i) {
      double t = sample_rotation(rng);
      REQUIRE(t > 0);
      REQUIRE(t <= kPi);
      near += t < kPi / 4;
    }
    CHECK(double(near) / n == doctest::Approx(rotation_cdf(kPi / 4)).epsilon(0.02));
  }

  TEST_CASE("interaction term") {
    Frame f{40, 40};
    InteractionParams g{2, 5};
    CHECK(log_aipp_unnorm({}, g, f) == 0);
    ObjectParams a, b;
    a.center = {15, 20};
    b.center = {20, 20};
    a.scale = b.scale = 6;
    Configuration c{{a, b}};
    auto cov = coverage_stats(c, f);
    CHECK(cov.multi > 0);
    CHECK(cov.multi == overlap_area(a, b, f));
    CHECK(log_aipp_unnorm(c, g, f) == doctest::Approx(-2 * 2 - 5.0 * double(cov.multi)));
    CHECK(log_aipp_unnorm(c, g, f, 10) == doctest::Approx(-2 * 2 - 0.5 * double(cov.multi)));
    double prev = 1;
    for (double g2 : {0.0, 1.0, 5.0, 40.0}) {
      double v = log_aipp_unnorm(c, {2, g2}, f);
      CHECK(v < prev);
      prev = v;
    }
  }

  TEST_CASE("two-way mode forbids triple coverage") {
    Frame f{30, 30};
    ObjectParams o;
    o.center = {15, 15};
    o.scale = 5;
    Configuration two{{o, o}}, three{{o, o, o}};
    CHECK(std::isfinite(log_two_way_unnorm(two, {1, 1}, f)));
    CHECK(log_two_way_unnorm(three, {1, 1}, f) == -INFINITY);
    PriorConfig p;
    p.mode = InteractionMode::TwoWayPairwise;
    CHECK(log_interaction(3, coverage_stats(three, f), {1, 1}, p) == -INFINITY);
  }

  TEST_CASE("mark prior") {
    PriorConfig p;
    ObjectParams o;
    o.scale = p.s_max / 2;
    CHECK(log_mark_prior(o, p) == doctest::Approx(-std::log(p.s_max) - std::log(4.0)));
    o.kind = TemplateKind::Ellipse;
    o.pure = 0.5;
    CHECK(log_mark_prior(o, p) == -INFINITY);
    o.pure = 2;
    o.rotation = 0.3;
    CHECK(std::isfinite(log_mark_prior(o, p)));
    o.scale = p.s_max + 1;
    CHECK(log_mark_prior(o, p) == -INFINITY);
  }

  TEST_CASE("sampled marks lie in the support") {
    Rng rng = Rng::stream(5, "t-marks");
    PriorConfig p;
    Frame f{100, 80};
    double sum = 0;
    int n = 20000;
    for (int i = 0; i < n; ++i) {
      ObjectParams o = sample_mark_prior(-1, p, f, rng);
      REQUIRE(std::isfinite(log_mark_prior(o, p)));
      REQUIRE(center_in_support(o.center, p, f));
      sum += o.scale;
    }
    double se = p.s_max / std::sqrt(12.0 * n);
    CHECK(std::abs(sum / n - p.s_max / 2) < 3 * se);
  }

  TEST_CASE("lognormal density") {
    CHECK(log_lognormal(1, {0, 1}) == doctest::Approx(-0.5 * std::log(2 * kPi)));
    CHECK(log_lognormal(0, {0, 1}) == -INFINITY);
    // default hyperparameters put the mean near 100
    LogNormalPrior d;
    CHECK(std::exp(d.location + d.scale * d.scale / 2) == doctest::Approx(100).epsilon(1e-9));
  }

  TEST_CASE("bounded intensity prior is normalized") {
    IntensitySupport s;
    // integrate over mu exactly and over var on a log grid
    int n = 20000;
    double lo = std::log(s.var_min), hi = std::log(s.var_max), h = (hi - lo) / n, total = 0;
    for (int i = 0; i < n; ++i) {
      double v = std::exp(lo + (i + 0.5) * h);
      IntensityParams ints{{100}, {v}};
      total += std::exp(log_intensity_prior_bounded(ints, s)) * (s.mean_max - s.mean_min) * v * h;
    }
    CHECK(total == doctest::Approx(1).epsilon(1e-9));
    CHECK(log_intensity_prior_bounded({{300}, {10}}, s) == -INFINITY);
    CHECK(log_intensity_prior_bounded({{100}, {0.1}}, s) == -INFINITY);
  }

  TEST_CASE("lattice marks") {
    PriorConfig p;
    p.templates = {TemplateKind::Circle};
    p.lattice = MarkLattice{{{1, 1}, {2, 2}}, {2, 3}};
    Frame f{8, 8};
    CHECK(center_measure(p, f) == 2);
    CHECK(center_in_support({1, 1}, p, f));
    CHECK_FALSE(center_in_support({1, 2}, p, f));
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
      auto o = sample_mark_prior(-1, p, f, rng);
      CHECK(log_mark_prior(o, p) == doctest::Approx(-std::log(2.0)));
    }
  }
}

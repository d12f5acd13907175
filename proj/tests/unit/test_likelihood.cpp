#include <doctest.h>

#include <omp.h>

#include <cmath>

#include "gen.hpp"
#include "mppseg/kernels.hpp"
#include "mppseg/likelihood.hpp"

using namespace mppseg;

namespace {

double log_normal_pdf(double y, double mu, double var) {
  return -0.5 * std::log(2 * kPi * var) - (y - mu) * (y - mu) / (2 * var);
}

}  // namespace

TEST_SUITE("likelihood") {
  TEST_CASE("overlap pixels belong to the darkest covering object") {
    Rng rng = Rng::stream(6, "t-minmean");
    Frame f{50, 40};
    for (int rep = 0; rep < 30; ++rep) {
      auto cfg = gen::config(rng, f, 6, 4, 18);
      auto ints = gen::intensities(rng, 6);
      LabelMap lm = build_label_map(cfg, ints, f);
      std::vector<Raster> rs;
      for (const auto& o : cfg.objects) rs.push_back(rasterize(o, f));
      for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
          int best = 0, cover = 0;
          for (std::size_t i = 0; i < rs.size(); ++i)
            if (rs[i].contains(x, y)) {
              ++cover;
              if (best == 0 || ints.mean[i + 1] < ints.mean[best]) best = int(i) + 1;
            }
          std::size_t p = std::size_t(y) * f.width + x;
          REQUIRE(lm.owner[p] == best);
          REQUIRE(lm.cover[p] == cover);
          REQUIRE(lm.mean[p] == ints.mean[best]);
        }
    }
  }

  TEST_CASE("log likelihood equals the per-pixel sum") {
    Rng rng = Rng::stream(7, "t-ll");
    Frame f{30, 30};
    auto cfg = gen::config(rng, f, 4);
    auto ints = gen::intensities(rng, 4);
    Image img = sample_image(cfg, ints, f, rng);
    LabelMap lm = build_label_map(cfg, ints, f);
    double brute = 0;
    for (std::size_t p = 0; p < f.pixels(); ++p) brute += log_normal_pdf(img.values[p], lm.mean[p], lm.variance[p]);
    CHECK(log_likelihood(img, cfg, ints, f) == doctest::Approx(brute).epsilon(1e-12));
  }

  TEST_CASE("serial and parallel kernels agree") {
    Rng rng = Rng::stream(8, "t-kernels");
    Frame f{123, 77};
    for (int rep = 0; rep < 10; ++rep) {
      auto cfg = gen::config(rng, f, 12, 3, 25);
      auto ints = gen::intensities(rng, 12);
      std::vector<Raster> rs;
      for (const auto& o : cfg.objects) rs.push_back(rasterize(o, f));
      std::vector<int> o1, c1, o2, c2;
      kernels::serial::label_map(rs, ints.mean, f, o1, c1);
      kernels::omp::label_map(rs, ints.mean, f, o2, c2);
      CHECK(o1 == o2);
      CHECK(c1 == c2);
      Image img = sample_image(cfg, ints, f, rng);
      double a = kernels::serial::log_likelihood(img.values, o1, ints.mean, ints.variance);
      double b = kernels::omp::log_likelihood(img.values, o1, ints.mean, ints.variance, f.width);
      CHECK(a == doctest::Approx(b).epsilon(1e-12));
      std::vector<double> s1, s2;
      kernels::serial::sample_pixels(o1, ints.mean, ints.variance, f, 99 + rep, s1);
      kernels::omp::sample_pixels(o1, ints.mean, ints.variance, f, 99 + rep, s2);
      CHECK(s1 == s2);
    }
  }

  TEST_CASE("parallel likelihood does not depend on the thread count") {
    Rng rng = Rng::stream(9, "t-threads");
    Frame f{200, 150};
    auto cfg = gen::config(rng, f, 10, 5, 30);
    auto ints = gen::intensities(rng, 10);
    Image img = sample_image(cfg, ints, f, rng);
    LabelMap lm = build_label_map(cfg, ints, f);
    double first = 0;
    for (int t : {1, 2, 3, 4}) {
      omp_set_num_threads(t);
      double v = kernels::omp::log_likelihood(img.values, lm.owner, ints.mean, ints.variance, f.width);
      if (t == 1) first = v;
      CHECK(v == first);
    }
  }

  TEST_CASE("delta log likelihood matches two full evaluations") {
    Rng rng = Rng::stream(10, "t-delta");
    Frame f{40, 40};
    for (int rep = 0; rep < 50; ++rep) {
      auto cfg = gen::config(rng, f, 3);
      auto ints = gen::intensities(rng, 3);
      Image img = sample_image(cfg, ints, f, rng);
      std::size_t i = rng.index(3);
      ObjectParams old = cfg.objects[i];
      double before = log_likelihood(img, cfg, ints, f);
      cfg.objects[i].center.x += rng.normal(0, 3);
      cfg.objects[i].scale *= rng.uniform(0.8, 1.2);
      double after = log_likelihood(img, cfg, ints, f);
      CHECK(delta_log_likelihood(img, cfg, ints, i, old) == doctest::Approx(after - before).epsilon(1e-9));
    }
  }

  TEST_CASE("block likelihood from sufficient statistics") {
    std::vector<int> ys{3, 7, 7, 10, 12};
    long long s1 = 0, s2 = 0;
    double direct = 0;
    for (int y : ys) {
      s1 += y;
      s2 += (long long)y * y;
      direct += log_normal_pdf(y, 8.5, 4.0);
    }
    CHECK(gaussian_block_loglik(5, s1, s2, 8.5, 4.0) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(gaussian_block_loglik(0, 0, 0, 8.5, 4.0) == 0);
  }

  TEST_CASE("zero-variance render is the label map") {
    Rng rng = Rng::stream(11, "t-render");
    Frame f{30, 30};
    auto cfg = gen::config(rng, f, 4);
    auto ints = gen::intensities(rng, 4);
    for (auto& v : ints.variance) v = 0;
    Image img = sample_image(cfg, ints, f, rng);
    LabelMap lm = build_label_map(cfg, ints, f);
    for (std::size_t p = 0; p < f.pixels(); ++p) CHECK(img.values[p] == int(std::lround(lm.mean[p])));
  }

  TEST_CASE("rendered values are quantized into [1, 256]") {
    Rng rng = Rng::stream(12, "t-quant");
    Frame f{20, 20};
    Configuration cfg;
    IntensityParams ints{{250}, {400}};
    Image img = sample_image(cfg, ints, f, rng);
    for (int v : img.values) {
      CHECK(v >= 1);
      CHECK(v <= 256);
    }
  }
}

#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "mppseg/initializer.hpp"
#include "mppseg/likelihood.hpp"

using namespace mppseg;

namespace {

Mask disc_mask(int w, int h, std::vector<std::array<double, 3>> discs) {
  Mask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (auto [cx, cy, r] : discs)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.on[std::size_t(y) * w + x] = 1;
  return m;
}

}  // namespace

TEST_SUITE("initializer") {
  TEST_CASE("threshold falls between two modes") {
    Rng rng(1);
    Image img(40, 40);
    for (std::size_t p = 0; p < img.values.size(); ++p)
      img.values[p] = int(std::lround(std::clamp(rng.normal(p % 3 ? 180 : 60, 8), 1.0, 256.0)));
    int t = otsu_threshold(img);
    CHECK(t > 60);
    CHECK(t < 180);
    Mask m = binarize(img, {false, 1, 2});
    // dark pixels are the foreground
    double fg = 0, bg = 0, nf = 0, nb = 0;
    for (std::size_t p = 0; p < img.values.size(); ++p)
      (m.on[p] ? (fg += img.values[p], nf += 1) : (bg += img.values[p], nb += 1));
    CHECK(fg / nf < bg / nb);
  }

  TEST_CASE("constant image has no foreground") {
    Image img(20, 20, 120);
    CHECK(otsu_threshold(img) == -1);
    CHECK(binarize(img).count() == 0);
    Rng rng(2);
    CHECK(morphological_init(img, PriorConfig{}, rng).m0 == 0);
  }

  TEST_CASE("distance transform matches brute force") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
      Mask m(23, 17);
      for (auto& v : m.on) v = rng.uniform() < 0.8;
      auto d = distance_transform(m);
      for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
          double best = INFINITY;
          for (int v = 0; v < m.height; ++v)
            for (int u = 0; u < m.width; ++u)
              if (!m.at(u, v)) best = std::min(best, std::hypot(u - x, v - y));
          double got = d[std::size_t(y) * m.width + x];
          if (std::isinf(best))
            CHECK(got > 1e6);
          else
            CHECK(got == doctest::Approx(best));
        }
    }
  }

  TEST_CASE("components are 8-connected and filtered by area") {
    Mask m(10, 10);
    auto set = [&](int x, int y) { m.on[std::size_t(y) * 10 + x] = 1; };
    set(1, 1), set(2, 2), set(3, 3);  // diagonal chain: one component
    set(7, 7), set(7, 8);
    set(0, 9);
    CHECK(connected_components(m).size() == 3);
    CHECK(connected_components(m, 2).size() == 2);
    std::size_t total = 0;
    for (const auto& c : connected_components(m)) total += c.count();
    CHECK(total == m.count());
  }

  TEST_CASE("two touching discs are split, one disc is not") {
    Mask two = disc_mask(60, 40, {{{20, 20, 9}}, {{36, 20, 9}}});
    REQUIRE(connected_components(two).size() == 1);
    auto parts = decompose_regions(two);
    CHECK(parts.size() == 2);
    std::size_t total = 0;
    for (const auto& p : parts) total += p.count();
    CHECK(total == two.count());
    CHECK(decompose_regions(disc_mask(60, 40, {{{30, 20, 12}}})).size() == 1);
  }

  TEST_CASE("estimates land near the rendered objects") {
    Frame f{80, 80};
    Configuration cfg;
    ObjectParams a, b;
    a.center = {25, 30};
    a.scale = 9;
    b.kind = TemplateKind::Square;
    b.center = {55, 50};
    b.scale = 10;
    b.rotation = 0.3;
    cfg.objects = {a, b};
    IntensityParams ints{{160, 60, 80}, {49, 49, 49}};
    Rng rng(4);
    Image img = sample_image(cfg, ints, f, rng);
    PriorConfig p;
    p.s_min = 3;
    InitEstimate est = morphological_init(img, p, rng);
    REQUIRE(est.m0 == 2);
    CHECK(est.ints.size() == 3);
    for (const auto& t : cfg.objects) {
      double best = INFINITY;
      const ObjectParams* hit = nullptr;
      for (const auto& o : est.cfg.objects)
        if (double d = std::hypot(o.center.x - t.center.x, o.center.y - t.center.y); d < best) best = d, hit = &o;
      CHECK(best < 1.5);
      CHECK(hit->scale == doctest::Approx(t.scale).epsilon(0.1));
      CHECK(hit->kind == t.kind);
    }
    CHECK(est.ints.mean[0] == doctest::Approx(160).epsilon(0.02));
  }

  TEST_CASE("random initial state is inside the support") {
    Image img(50, 50, 160);
    PriorConfig p;
    p.s_max = 15;
    Rng rng(5);
    InitEstimate est = random_init(img, p, {2, 5}, rng);
    CHECK(est.ints.size() == est.cfg.m() + 1);
    for (const auto& o : est.cfg.objects) {
      CHECK(std::isfinite(log_mark_prior(o, p)));
      CHECK(center_in_support(o.center, p, img.frame()));
    }
  }
}

#include <doctest.h>

#include "gen.hpp"
#include "mppseg/likelihood.hpp"
#include "mppseg/pixel_state.hpp"

using namespace mppseg;

namespace {

void check_same(const PixelState& a, const PixelState& b, const IntensityParams& ints) {
  REQUIRE(a.m() == b.m());
  const Frame& f = a.frame();
  for (std::size_t p = 0; p < f.pixels(); ++p) {
    REQUIRE(a.owner_at(p) == b.owner_at(p));
    REQUIRE(a.cover_at(p) == b.cover_at(p));
  }
  for (int o = 0; o <= int(a.m()); ++o) {
    CHECK(a.stats(o).n == b.stats(o).n);
    CHECK(a.stats(o).s1 == b.stats(o).s1);
    CHECK(a.stats(o).s2 == b.stats(o).s2);
  }
  CHECK(a.multi() == b.multi());
  CHECK(a.pair_sum() == b.pair_sum());
  CHECK(a.triple() == b.triple());
  CHECK(a.log_likelihood(ints) == b.log_likelihood(ints));
}

}  // namespace

TEST_SUITE("pixel_state") {
  TEST_CASE("random updates agree with a fresh build") {
    Rng rng = Rng::stream(20, "t-pixels");
    Frame f{60, 50};
    auto cfg = gen::config(rng, f, 3, 3, 15);
    auto ints = gen::intensities(rng, 3);
    Image img = sample_image(cfg, ints, f, rng);
    std::vector<Raster> rs;
    for (const auto& o : cfg.objects) rs.push_back(rasterize(o, f));
    PixelState ps(img, rs, ints.mean);

    for (int step = 0; step < 400; ++step) {
      int op = int(rng.index(4));
      std::size_t m = rs.size();
      if (op == 0 && m > 0) {  // move
        std::size_t i = rng.index(m);
        Raster r = rasterize(gen::object(rng, f, 3, 15), f);
        auto d = ps.propose_raster(i, r, ints.mean);
        double before = ps.log_likelihood(ints);
        double dl = ps.delta_loglik(d, ints, ints);
        ps.commit(std::move(d));
        rs[i] = r;
        CHECK(ps.log_likelihood(ints) - before == doctest::Approx(dl).epsilon(1e-9));
      } else if (op == 1 && m > 0) {  // mean change can reorder ownership
        std::size_t i = rng.index(m);
        double nm = rng.uniform(20, 120);
        IntensityParams after = ints;
        after.mean[i + 1] = nm;
        auto d = ps.propose_mean(i, nm, ints.mean);
        double before = ps.log_likelihood(ints);
        double dl = ps.delta_loglik(d, ints, after, {int(i) + 1});
        ps.commit(std::move(d));
        ints = after;
        CHECK(ps.log_likelihood(ints) - before == doctest::Approx(dl).epsilon(1e-9));
      } else if (op == 2 && m < 8) {  // birth
        Raster r = rasterize(gen::object(rng, f, 3, 15), f);
        ints.mean.push_back(rng.uniform(20, 120));
        ints.variance.push_back(rng.uniform(20, 200));
        ps.append_object(r, ints.mean);
        rs.push_back(r);
      } else if (m > 0) {  // death
        std::size_t i = rng.index(m);
        ints.mean[i + 1] = ints.mean.back();
        ints.variance[i + 1] = ints.variance.back();
        ints.mean.pop_back();
        ints.variance.pop_back();
        rs[i] = rs.back();
        rs.pop_back();
        ps.remove_object(i, ints.mean);
      }
      if (step % 20 == 0) check_same(ps, PixelState(img, rs, ints.mean), ints);
    }
    check_same(ps, PixelState(img, rs, ints.mean), ints);
  }

  TEST_CASE("likelihood matches the label-map evaluation") {
    Rng rng = Rng::stream(21, "t-pixels2");
    Frame f{40, 40};
    auto cfg = gen::config(rng, f, 5);
    auto ints = gen::intensities(rng, 5);
    Image img = sample_image(cfg, ints, f, rng);
    std::vector<Raster> rs;
    for (const auto& o : cfg.objects) rs.push_back(rasterize(o, f));
    PixelState ps(img, rs, ints.mean);
    CHECK(ps.log_likelihood(ints) == doctest::Approx(log_likelihood(img, cfg, ints, f)).epsilon(1e-12));
    auto cov = coverage_stats(cfg, f);
    CHECK(ps.multi() == cov.multi);
    CHECK(ps.pair_sum() == cov.pair_sum);
  }
}

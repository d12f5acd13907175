#include "mppseg/simulator.hpp"

#include <cmath>
#include <stdexcept>

#include "mppseg/aipp_chain.hpp"
#include "mppseg/likelihood.hpp"

namespace mppseg {

namespace {
bool inside_frame(const ObjectParams& o, const Frame& f) {
  for (const auto& p : landmarks(o))
    if (p.x < 0 || p.y < 0 || p.x > f.width - 1 || p.y > f.height - 1) return false;
  return true;
}
}  // namespace

PriorConfig generation_prior(const SimulationConfig& sim, const PriorConfig& base) {
  PriorConfig p = base;
  p.s_min = sim.scale_min;
  p.s_max = sim.scale_max;
  p.center_margin = base.margin();
  p.templates = sim.templates;
  p.lattice.reset();
  return p;
}

Configuration sample_configuration(int m, const InteractionParams& gamma, const PriorConfig& prior, const Frame& f,
                                   long long sweeps, Rng& rng, bool fully_visible, bool non_overlapping) {
  const int budget = 100000;
  if (m < 0) {
    AippChain chain(prior, f, 100000);
    for (long long k = 0; k < sweeps; ++k) chain.birth_death_step(gamma, rng);
    return chain.config();
  }
  AippChain::Admissible ok;
  if (fully_visible) ok = [&](const ObjectParams& o, const Raster&) { return inside_frame(o, f); };
  Configuration init;
  std::vector<Raster> placed;
  for (int i = 0; i < m; ++i) {
    int tries = 0;
    for (;; ++tries) {
      if (tries >= budget) throw std::runtime_error("could not place object under the simulation constraints");
      ObjectParams o = sample_mark_prior(-1, prior, f, rng);
      Raster r = rasterize(o, f);
      if (prior.require_visible && r.empty()) continue;
      if (ok && !ok(o, r)) continue;
      bool clash = false;
      if (non_overlapping)
        for (const auto& q : placed) clash = clash || overlap_count(q, r) > 0;
      if (clash) continue;
      init.objects.push_back(o);
      placed.push_back(std::move(r));
      break;
    }
  }
  AippChain chain(prior, f, std::size_t(m), init);
  for (long long s = 0; s < sweeps; ++s)
    for (int i = 0; i < m; ++i) chain.redraw_step(gamma, rng, ok, non_overlapping);
  return chain.config();
}

IntensityParams sample_intensities(std::size_t m, const SimulationConfig& sim, Rng& rng) {
  IntensityParams ints;
  double s0 = rng.uniform(sim.sigma_lo, sim.sigma_hi);
  ints.mean.push_back(sim.background_mean);
  ints.variance.push_back(s0 * s0);
  for (std::size_t i = 0; i < m; ++i) {
    ints.mean.push_back(rng.uniform(sim.object_mean_lo, sim.object_mean_hi));
    double s = rng.uniform(sim.sigma_lo, sim.sigma_hi);
    ints.variance.push_back(s * s);
  }
  return ints;
}

Image render(const GroundTruth& gt, Rng& rng) { return sample_image(gt.cfg, gt.ints, gt.frame, rng); }

GroundTruth simulate(const SimulationConfig& sim, const PriorConfig& base, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "simulate");
  PriorConfig p = generation_prior(sim, base);
  GroundTruth gt;
  gt.frame = sim.frame;
  gt.gamma = sim.gamma;
  gt.seed = seed;
  gt.cfg = sample_configuration(sim.objects, sim.gamma, p, sim.frame, sim.equilibration_sweeps, rng, sim.fully_visible,
                                sim.non_overlapping);
  gt.ints = sample_intensities(gt.cfg.m(), sim, rng);
  return gt;
}

}  // namespace mppseg

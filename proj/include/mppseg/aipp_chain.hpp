#pragma once

#include <functional>
#include <vector>

#include "mppseg/geometry.hpp"
#include "mppseg/prior.hpp"
#include "mppseg/rng.hpp"

namespace mppseg {

// Metropolis chain on configurations targeting the interaction prior alone
// (no image): exp(-g1 m - g2 S) times the mark prior, centers Lebesgue on the
// padded frame. Used for exchange-step auxiliary draws and for simulation.
class AippChain {
 public:
  AippChain(const PriorConfig& prior, const Frame& f, std::size_t m_max);
  AippChain(const PriorConfig& prior, const Frame& f, std::size_t m_max, const Configuration& init);

  const Configuration& config() const { return cfg_; }
  std::size_t m() const { return cfg_.m(); }
  const CoverageStats& coverage() const { return cov_; }
  double interaction(const InteractionParams& g) const { return log_interaction(cfg_.m(), cov_, g, prior_); }

  // one birth or death proposal
  bool birth_death_step(const InteractionParams& g, Rng& rng);
  // redraw one object's marks from the prior (count stays fixed); `admissible`
  // restricts the support, `hard_core` forbids any overlap
  using Admissible = std::function<bool(const ObjectParams&, const Raster&)>;
  bool redraw_step(const InteractionParams& g, Rng& rng, const Admissible& admissible = {}, bool hard_core = false);

 private:
  void apply(const Raster& r, int sign);
  CoverageStats shifted(const Raster& r, int sign) const;  // counters after adding/removing r
  bool visible(const Raster& r) const { return !prior_.require_visible || !r.empty(); }

  PriorConfig prior_;
  Frame frame_;
  std::size_t m_max_;
  Configuration cfg_;
  std::vector<Raster> rasters_;
  std::vector<int> cover_;
  CoverageStats cov_;
  long long triple_ = 0;
};

}  // namespace mppseg

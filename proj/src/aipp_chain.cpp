#include "mppseg/aipp_chain.hpp"

#include <cmath>
#include <limits>

namespace mppseg {

AippChain::AippChain(const PriorConfig& prior, const Frame& f, std::size_t m_max)
    : prior_(prior), frame_(f), m_max_(m_max), cover_(f.pixels(), 0) {}

AippChain::AippChain(const PriorConfig& prior, const Frame& f, std::size_t m_max, const Configuration& init)
    : AippChain(prior, f, m_max) {
  for (const auto& o : init.objects) {
    cfg_.objects.push_back(o);
    rasters_.push_back(rasterize(o, frame_));
    apply(rasters_.back(), +1);
  }
}

void AippChain::apply(const Raster& r, int sign) {
  for (std::size_t row = 0; row < r.spans.size(); ++row) {
    int* line = cover_.data() + std::size_t(r.y0 + int(row)) * frame_.width;
    for (int x = r.spans[row].x0; x < r.spans[row].x1; ++x) {
      int oc = line[x], nc = oc + sign;
      cov_.multi += (nc >= 2) - (oc >= 2);
      cov_.pair_sum += (long long)nc * (nc - 1) / 2 - (long long)oc * (oc - 1) / 2;
      triple_ += (nc >= 3) - (oc >= 3);
      line[x] = nc;
    }
  }
  cov_.max_cover = triple_ > 0 ? 3 : (cov_.multi > 0 ? 2 : 0);
}

CoverageStats AippChain::shifted(const Raster& r, int sign) const {
  CoverageStats c = cov_;
  long long triple = triple_;
  for (std::size_t row = 0; row < r.spans.size(); ++row) {
    const int* line = cover_.data() + std::size_t(r.y0 + int(row)) * frame_.width;
    for (int x = r.spans[row].x0; x < r.spans[row].x1; ++x) {
      int oc = line[x], nc = oc + sign;
      c.multi += (nc >= 2) - (oc >= 2);
      c.pair_sum += (long long)nc * (nc - 1) / 2 - (long long)oc * (oc - 1) / 2;
      triple += (nc >= 3) - (oc >= 3);
    }
  }
  c.max_cover = triple > 0 ? 3 : (c.multi > 0 ? 2 : 0);
  return c;
}

bool AippChain::birth_death_step(const InteractionParams& g, Rng& rng) {
  std::size_t m = cfg_.m();
  double log_w = std::log(center_measure(prior_, frame_));
  if (rng.uniform() < 0.5) {
    ObjectParams o = sample_mark_prior(-1, prior_, frame_, rng);
    double u = rng.uniform();
    if (m + 1 > m_max_) return false;
    Raster r = rasterize(o, frame_);
    if (!visible(r)) return false;
    CoverageStats c = shifted(r, +1);
    double la = log_interaction(m + 1, c, g, prior_) - log_interaction(m, cov_, g, prior_) + log_w - std::log(double(m + 1));
    if (!(std::log(u) < la)) return false;
    apply(r, +1);
    cfg_.objects.push_back(o);
    rasters_.push_back(std::move(r));
    return true;
  }
  if (m == 0) return false;
  std::size_t j = rng.index(m);
  double u = rng.uniform();
  CoverageStats c = shifted(rasters_[j], -1);
  double la = log_interaction(m - 1, c, g, prior_) - log_interaction(m, cov_, g, prior_) - log_w + std::log(double(m));
  if (!(std::log(u) < la)) return false;
  apply(rasters_[j], -1);
  cfg_.objects[j] = cfg_.objects.back();
  cfg_.objects.pop_back();
  rasters_[j] = std::move(rasters_.back());
  rasters_.pop_back();
  return true;
}

bool AippChain::redraw_step(const InteractionParams& g, Rng& rng, const Admissible& admissible, bool hard_core) {
  std::size_t m = cfg_.m();
  if (m == 0) return false;
  std::size_t j = rng.index(m);
  ObjectParams o = sample_mark_prior(-1, prior_, frame_, rng);
  double u = rng.uniform();
  Raster r = rasterize(o, frame_);
  if (!visible(r) || (admissible && !admissible(o, r))) return false;
  double before = log_interaction(m, cov_, g, prior_);
  apply(rasters_[j], -1);
  CoverageStats c = shifted(r, +1);
  double la = log_interaction(m, c, g, prior_) - before;
  if (hard_core && c.multi > 0) la = -std::numeric_limits<double>::infinity();
  if (std::log(u) < la) {
    apply(r, +1);
    cfg_.objects[j] = o;
    rasters_[j] = std::move(r);
    return true;
  }
  apply(rasters_[j], +1);
  return false;
}

}  // namespace mppseg

#pragma once
// hand-rolled generators for property tests

#include "mppseg/geometry.hpp"
#include "mppseg/prior.hpp"
#include "mppseg/rng.hpp"

namespace gen {

using namespace mppseg;

inline ObjectParams object(Rng& rng, const Frame& f, double s_lo = 2, double s_hi = 20) {
  PriorConfig p;
  ObjectParams o;
  o.kind = TemplateKind(rng.index(kTemplateCount));
  o.center = {rng.uniform(-5, f.width + 5), rng.uniform(-5, f.height + 5)};
  o.scale = rng.uniform(s_lo, s_hi);
  o.rotation = has_rotation(o.kind) ? rng.uniform(-kPi, kPi) : 0.0;
  o.pure = has_pure(o.kind) ? sample_pure(o.kind, p, rng) : 0.0;
  return o;
}

inline Configuration config(Rng& rng, const Frame& f, std::size_t m, double s_lo = 2, double s_hi = 20) {
  Configuration c;
  for (std::size_t i = 0; i < m; ++i) c.objects.push_back(object(rng, f, s_lo, s_hi));
  return c;
}

inline IntensityParams intensities(Rng& rng, std::size_t m) {
  IntensityParams ints;
  ints.mean = {rng.uniform(140, 180)};
  ints.variance = {rng.uniform(20, 200)};
  for (std::size_t i = 0; i < m; ++i) {
    ints.mean.push_back(rng.uniform(30, 100));
    ints.variance.push_back(rng.uniform(20, 200));
  }
  return ints;
}

}  // namespace gen

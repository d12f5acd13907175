#pragma once

#include <cstdint>
#include <optional>

#include "mppseg/geometry.hpp"
#include "mppseg/image.hpp"
#include "mppseg/prior.hpp"
#include "mppseg/rng.hpp"

namespace mppseg {

struct SimulationConfig {
  Frame frame{200, 200};
  int objects = 10;  // negative: count governed by the prior
  InteractionParams gamma{10, 40};
  long long equilibration_sweeps = 100000;
  double background_mean = 160;
  double object_mean_lo = 40, object_mean_hi = 90;
  double sigma_lo = 5, sigma_hi = 15;
  double scale_min = 8, scale_max = 30;  // marks prior used for generation
  std::vector<TemplateKind> templates{TemplateKind::Circle, TemplateKind::Ellipse, TemplateKind::Triangle,
                                      TemplateKind::Square};
  bool fully_visible = false;  // every object inside the frame
  bool non_overlapping = false;
  bool operator==(const SimulationConfig&) const = default;
};

struct GroundTruth {
  Configuration cfg;
  IntensityParams ints;
  InteractionParams gamma;
  Frame frame;
  std::uint64_t seed = 0;
  bool operator==(const GroundTruth&) const = default;
};

// generation prior derived from the simulation settings and the fit prior
PriorConfig generation_prior(const SimulationConfig& sim, const PriorConfig& base);

// fixed count: prior draws equilibrated by independence redraws; negative m:
// birth-death chain on the interaction prior. Throws std::runtime_error if
// constraints cannot be met.
Configuration sample_configuration(int m, const InteractionParams& gamma, const PriorConfig& prior, const Frame& f,
                                   long long sweeps, Rng& rng, bool fully_visible = false, bool non_overlapping = false);

IntensityParams sample_intensities(std::size_t m, const SimulationConfig& sim, Rng& rng);
Image render(const GroundTruth& gt, Rng& rng);

GroundTruth simulate(const SimulationConfig& sim, const PriorConfig& base, std::uint64_t seed);

}  // namespace mppseg

#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "mppseg/geometry.hpp"
#include "mppseg/rng.hpp"

namespace mppseg {

struct InteractionParams {
  double gamma1 = 10, gamma2 = 40;
  bool operator==(const InteractionParams&) const = default;
};

// scaled Beta on (lo, hi)
struct BetaPrior {
  double lo = 0, hi = 1, alpha = 1, beta = 1;
  bool operator==(const BetaPrior&) const = default;
};

// log gamma ~ N(location, scale^2)
struct LogNormalPrior {
  double location = std::log(100.0) - 1.125, scale = 1.5;
  bool operator==(const LogNormalPrior&) const = default;
};

// index 0 is the background
struct IntensityParams {
  std::vector<double> mean, variance;
  std::size_t size() const { return mean.size(); }
  bool operator==(const IntensityParams&) const = default;
};

enum class InteractionMode { AreaOfMultiCoverage, TwoWayPairwise };

// Discrete mark space used for enumerable toy models.
struct MarkLattice {
  std::vector<Point> centers;
  std::vector<double> scales;
  bool operator==(const MarkLattice&) const = default;
};

// Bounded support of the per-component intensity prior.
struct IntensitySupport {
  double mean_min = 0, mean_max = 257;
  double var_min = 0.25, var_max = 1e4;
  // log of the per-component normalizer of 1/sigma^2 on the support
  double log_norm() const { return std::log((mean_max - mean_min) * std::log(var_max / var_min)); }
  bool contains(double mu, double var) const {
    return mu >= mean_min && mu <= mean_max && var >= var_min && var <= var_max;
  }
  bool operator==(const IntensitySupport&) const = default;
};

struct PriorConfig {
  double s_min = 0, s_max = 40;
  BetaPrior ellipse{1.0, 3.0, 1.5, 3.0};
  BetaPrior triangle{1.5, 2.5, 2.0, 2.0};
  LogNormalPrior gamma1, gamma2;
  std::vector<TemplateKind> templates{TemplateKind::Circle, TemplateKind::Ellipse, TemplateKind::Triangle,
                                      TemplateKind::Square};
  InteractionMode mode = InteractionMode::AreaOfMultiCoverage;
  double center_margin = -1;  // negative: s_max / 2
  double area_unit = 1;       // pixels per unit of overlap area in the AIPP exponent
  IntensitySupport intensity;
  bool require_visible = true;  // each object must cover at least one in-frame pixel
  std::optional<MarkLattice> lattice;

  double margin() const { return center_margin < 0 ? s_max / 2 : center_margin; }
  const BetaPrior& pure_prior(TemplateKind k) const { return k == TemplateKind::Ellipse ? ellipse : triangle; }
  Template template_for(TemplateKind k) const;
  bool allows(TemplateKind k) const;
  void validate() const;
  bool operator==(const PriorConfig&) const = default;
};

struct CoverageStats {
  long long multi = 0;     // pixels covered at least twice
  long long pair_sum = 0;  // sum over pixels of C(cover, 2)
  int max_cover = 0;
};

CoverageStats coverage_stats(const std::vector<Raster>& rasters, const Frame& f);
CoverageStats coverage_stats(const Configuration& cfg, const Frame& f);

double log_aipp_unnorm(const Configuration& cfg, const InteractionParams& g, const Frame& f, double area_unit = 1);
double log_two_way_unnorm(const Configuration& cfg, const InteractionParams& g, const Frame& f, double area_unit = 1);
// interaction term selected by prior.mode, from precomputed counts
double log_interaction(std::size_t m, const CoverageStats& c, const InteractionParams& g, const PriorConfig& p);

// density of theta on (0, pi]; zero elsewhere
double rotation_density(double theta);
double rotation_cdf(double theta);
// pi-periodic extension on (-pi, pi], integrates to 1
double rotation_density_full(double theta);
double sample_rotation(Rng& rng);       // (0, pi]
double sample_rotation_full(Rng& rng);  // (-pi, pi]

double log_beta_density(double g, const BetaPrior& b);
double log_mark_prior(const ObjectParams& obj, const PriorConfig& p);
// reference measure of the center is Lebesgue on the padded frame (or counting on a lattice)
bool center_in_support(Point c, const PriorConfig& p, const Frame& f);
double center_measure(const PriorConfig& p, const Frame& f);

double log_intensity_prior(const IntensityParams& ints);
// normalized on the bounded support; -inf outside
double log_intensity_prior_bounded(const IntensityParams& ints, const IntensitySupport& s);

double log_lognormal(double x, const LogNormalPrior& ln);
double log_gamma_prior(const InteractionParams& g, const PriorConfig& p);

Point sample_center(const PriorConfig& p, const Frame& f, Rng& rng);
// kind < 0: template drawn uniformly from p.templates
ObjectParams sample_mark_prior(int kind, const PriorConfig& p, const Frame& f, Rng& rng);
double sample_scale(const PriorConfig& p, Rng& rng);
double sample_pure(TemplateKind k, const PriorConfig& p, Rng& rng);

}  // namespace mppseg

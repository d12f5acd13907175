#include "mppseg/prior.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <stdexcept>

namespace mppseg {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kRotKnots = 4096;

struct RotationTable {
  std::array<double, kRotKnots + 1> theta{}, cdf{};
  RotationTable() {
    for (int k = 0; k <= kRotKnots; ++k) {
      theta[k] = kPi * k / kRotKnots;
      cdf[k] = rotation_cdf(theta[k]);
    }
    cdf[kRotKnots] = 1.0;
  }
  double invert(double u) const {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    int k = int(it - cdf.begin()) - 1;
    k = std::clamp(k, 0, kRotKnots - 1);
    double t = (u - cdf[k]) / (cdf[k + 1] - cdf[k]);
    double th = theta[k] + t * (theta[k + 1] - theta[k]);
    // one Newton step on the analytic cdf
    double d = rotation_density(th);
    if (d > 0) th -= (rotation_cdf(th) - u) / d;
    return std::clamp(th, theta[k], theta[k + 1]);
  }
};

const RotationTable& rotation_table() {
  static const RotationTable t;
  return t;
}
}  // namespace

Template PriorConfig::template_for(TemplateKind k) const {
  if (!has_pure(k)) return {k, {}};
  const BetaPrior& b = pure_prior(k);
  return {k, {b.lo, b.hi}};
}

bool PriorConfig::allows(TemplateKind k) const {
  return std::find(templates.begin(), templates.end(), k) != templates.end();
}

void PriorConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(what); };
  if (!(s_max > 0) || !(s_min >= 0) || !(s_min < s_max)) fail("need 0 <= s_min < s_max");
  for (const BetaPrior* b : {&ellipse, &triangle})
    if (!(b->lo < b->hi) || !(b->lo > 0) || !(b->alpha > 0) || !(b->beta > 0)) fail("bad pure-parameter prior");
  if (!(gamma1.scale > 0) || !(gamma2.scale > 0)) fail("lognormal scale must be positive");
  if (templates.empty()) fail("no templates enabled");
  if (!(area_unit > 0)) fail("area_unit must be positive");
  if (!(intensity.mean_min < intensity.mean_max) || !(intensity.var_min > 0) || !(intensity.var_min < intensity.var_max))
    fail("bad intensity support");
  if (lattice && (lattice->centers.empty() || lattice->scales.empty())) fail("empty lattice");
}

CoverageStats coverage_stats(const std::vector<Raster>& rasters, const Frame& f) {
  CoverageStats c;
  std::vector<int> cover(f.pixels(), 0);
  for (const auto& r : rasters)
    for (std::size_t row = 0; row < r.spans.size(); ++row) {
      int* line = cover.data() + std::size_t(r.y0 + int(row)) * f.width;
      for (int x = r.spans[row].x0; x < r.spans[row].x1; ++x) ++line[x];
    }
  for (int v : cover) {
    if (v >= 2) ++c.multi;
    c.pair_sum += (long long)v * (v - 1) / 2;
    c.max_cover = std::max(c.max_cover, v);
  }
  return c;
}

CoverageStats coverage_stats(const Configuration& cfg, const Frame& f) {
  std::vector<Raster> rs;
  for (const auto& o : cfg.objects) rs.push_back(rasterize(o, f));
  return coverage_stats(rs, f);
}

double log_aipp_unnorm(const Configuration& cfg, const InteractionParams& g, const Frame& f, double area_unit) {
  auto c = coverage_stats(cfg, f);
  return -g.gamma1 * double(cfg.m()) - g.gamma2 * double(c.multi) / area_unit;
}

double log_two_way_unnorm(const Configuration& cfg, const InteractionParams& g, const Frame& f, double area_unit) {
  auto c = coverage_stats(cfg, f);
  if (c.max_cover >= 3) return kNegInf;
  return -g.gamma1 * double(cfg.m()) - g.gamma2 * double(c.pair_sum) / area_unit;
}

double log_interaction(std::size_t m, const CoverageStats& c, const InteractionParams& g, const PriorConfig& p) {
  if (p.mode == InteractionMode::TwoWayPairwise) {
    if (c.max_cover >= 3) return kNegInf;
    return -g.gamma1 * double(m) - g.gamma2 * double(c.pair_sum) / p.area_unit;
  }
  return -g.gamma1 * double(m) - g.gamma2 * double(c.multi) / p.area_unit;
}

double rotation_density(double th) {
  if (!(th > 0 && th <= kPi)) return 0.0;
  return (std::abs(std::cos(th)) + 1.0 / kPi) / 3.0;
}

double rotation_cdf(double th) {
  if (th <= 0) return 0.0;
  if (th >= kPi) return 1.0;
  double s = th <= kPi / 2 ? std::sin(th) : 2.0 - std::sin(th);
  return (s + th / kPi) / 3.0;
}

double rotation_density_full(double th) {
  if (!(th > -kPi && th <= kPi)) return 0.0;
  return (std::abs(std::cos(th)) + 1.0 / kPi) / 6.0;
}

double sample_rotation(Rng& rng) {
  double u = rng.uniform();
  double th = rotation_table().invert(u);
  return th > 0 ? th : kPi;  // keep inside (0, pi]
}

double sample_rotation_full(Rng& rng) {
  double th = sample_rotation(rng);
  if (rng.uniform() < 0.5) th -= kPi;  // lands in (-pi, 0]
  return wrap_angle(th);
}

double log_beta_density(double g, const BetaPrior& b) {
  if (!(g > b.lo && g < b.hi)) return kNegInf;
  double w = b.hi - b.lo;
  double x = (g - b.lo) / w;
  return (b.alpha - 1) * std::log(x) + (b.beta - 1) * std::log1p(-x) -
         (std::lgamma(b.alpha) + std::lgamma(b.beta) - std::lgamma(b.alpha + b.beta)) - std::log(w);
}

double log_mark_prior(const ObjectParams& o, const PriorConfig& p) {
  if (!p.allows(o.kind)) return kNegInf;
  double lp = -std::log(double(p.templates.size()));
  if (p.lattice) {
    const auto& sc = p.lattice->scales;
    if (std::find(sc.begin(), sc.end(), o.scale) == sc.end()) return kNegInf;
    lp -= std::log(double(sc.size()));
  } else {
    if (!(o.scale > p.s_min && o.scale < p.s_max)) return kNegInf;
    lp -= std::log(p.s_max - p.s_min);
  }
  if (has_rotation(o.kind)) {
    double d = rotation_density_full(o.rotation);
    if (!(d > 0)) return kNegInf;
    lp += std::log(d);
  } else if (o.rotation != 0.0) {
    return kNegInf;
  }
  if (has_pure(o.kind)) lp += log_beta_density(o.pure, p.pure_prior(o.kind));
  return lp;
}

bool center_in_support(Point c, const PriorConfig& p, const Frame& f) {
  if (p.lattice) {
    const auto& cs = p.lattice->centers;
    return std::find(cs.begin(), cs.end(), c) != cs.end();
  }
  // pixel centers sit at 0 .. w-1; the frame spans [-0.5, w-0.5]
  double m = p.margin();
  return c.x >= -0.5 - m && c.x <= f.width - 0.5 + m && c.y >= -0.5 - m && c.y <= f.height - 0.5 + m;
}

double center_measure(const PriorConfig& p, const Frame& f) {
  if (p.lattice) return double(p.lattice->centers.size());
  double m = p.margin();
  return (f.width + 2 * m) * (f.height + 2 * m);
}

double log_intensity_prior(const IntensityParams& ints) {
  double lp = 0;
  for (double v : ints.variance) {
    if (!(v > 0)) return kNegInf;
    lp -= std::log(v);
  }
  return lp;
}

double log_intensity_prior_bounded(const IntensityParams& ints, const IntensitySupport& s) {
  double lp = 0, ln = s.log_norm();
  for (std::size_t i = 0; i < ints.size(); ++i) {
    if (!s.contains(ints.mean[i], ints.variance[i])) return kNegInf;
    lp -= std::log(ints.variance[i]) + ln;
  }
  return lp;
}

double log_lognormal(double x, const LogNormalPrior& ln) {
  if (!(x > 0)) return kNegInf;
  double z = (std::log(x) - ln.location) / ln.scale;
  return -std::log(x) - 0.5 * std::log(2 * kPi * ln.scale * ln.scale) - 0.5 * z * z;
}

double log_gamma_prior(const InteractionParams& g, const PriorConfig& p) {
  return log_lognormal(g.gamma1, p.gamma1) + log_lognormal(g.gamma2, p.gamma2);
}

Point sample_center(const PriorConfig& p, const Frame& f, Rng& rng) {
  if (p.lattice) return p.lattice->centers[rng.index(p.lattice->centers.size())];
  double m = p.margin();
  double x = rng.uniform(-0.5 - m, f.width - 0.5 + m);
  double y = rng.uniform(-0.5 - m, f.height - 0.5 + m);
  return {x, y};
}

double sample_scale(const PriorConfig& p, Rng& rng) {
  if (p.lattice) return p.lattice->scales[rng.index(p.lattice->scales.size())];
  if (!(p.s_max > p.s_min)) throw std::invalid_argument("empty scale range");
  double s;
  do s = rng.uniform(p.s_min, p.s_max);
  while (!(s > p.s_min));
  return s;
}

double sample_pure(TemplateKind k, const PriorConfig& p, Rng& rng) {
  if (!has_pure(k)) return 0.0;
  const BetaPrior& b = p.pure_prior(k);
  double g;
  do g = b.lo + (b.hi - b.lo) * rng.beta(b.alpha, b.beta);
  while (!(g > b.lo && g < b.hi));
  return g;
}

ObjectParams sample_mark_prior(int kind, const PriorConfig& p, const Frame& f, Rng& rng) {
  ObjectParams o;
  o.kind = kind < 0 ? p.templates[rng.index(p.templates.size())] : TemplateKind(kind);
  o.center = sample_center(p, f, rng);
  o.scale = sample_scale(p, rng);
  o.rotation = has_rotation(o.kind) ? sample_rotation_full(rng) : 0.0;
  o.pure = sample_pure(o.kind, p, rng);
  return o;
}

}  // namespace mppseg

#include "mppseg/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mppseg/likelihood.hpp"

namespace mppseg {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_normal_pdf(double x, double mu, double sd) {
  double z = (x - mu) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2 * kPi);
}

std::vector<Raster> rasters_of(const Configuration& c, const Frame& f) {
  std::vector<Raster> rs;
  for (const auto& o : c.objects) rs.push_back(rasterize(o, f));
  return rs;
}

template <class T>
void swap_remove(std::vector<T>& v, std::size_t i) {
  v[i] = v.back();
  v.pop_back();
}
}  // namespace

const char* move_name(MoveKind k) {
  static const char* names[] = {"center", "scale", "rotation", "pure", "mean", "variance", "swap",
                                "birth", "death", "split", "merge", "gamma", "exchange"};
  return names[int(k)];
}

void SamplerConfig::validate() const {
  auto fail = [](const char* w) { throw std::invalid_argument(w); };
  for (double p : {moves.birth, moves.death, moves.split, moves.merge})
    if (!(p >= 0 && p <= 1)) fail("move probabilities must lie in [0, 1]");
  if (moves.birth + moves.death + moves.split + moves.merge > 1 + 1e-12) fail("move probabilities sum above 1");
  for (double s : {steps.center, steps.scale, steps.rotation, steps.pure, steps.mean, steps.log_variance, steps.log_gamma})
    if (!(s >= 0)) fail("step sizes must be non-negative");
  if (mcmh_aux_count < 1) fail("mcmh_aux_count must be at least 1");
  if (aux_spacing < 1) fail("aux_spacing must be at least 1");
  if (iterations < 0 || burn_in < 0 || thinning < 1) fail("bad iteration counts");
  if (!(neighbor_distance_factor > 0)) fail("neighbor_distance_factor must be positive");
  if (!(fixed_variance > 0)) fail("fixed_variance must be positive");
}

// ---------------------------------------------------------------- transforms

SplitResult split_transform(const ObjectParams& h, const SplitAux& u) {
  double sa = h.scale * std::sqrt((1 + u.u3) / 2);
  double sb = h.scale * std::sqrt((1 - u.u3) / 2);
  double dx = u.u1 * std::cos(u.u2), dy = u.u1 * std::sin(u.u2);
  double wa = sa / (sa + sb), wb = sb / (sa + sb);
  SplitResult r;
  r.a = h;
  r.a.scale = sa;
  r.a.center = {h.center.x - wb * dx, h.center.y - wb * dy};
  r.b.center = {h.center.x + wa * dx, h.center.y + wa * dy};
  r.b.scale = sb;
  r.b.kind = u.kind;
  r.b.rotation = has_rotation(u.kind) ? u.rotation : 0.0;
  r.b.pure = has_pure(u.kind) ? u.pure : 0.0;
  return r;
}

std::pair<ObjectParams, SplitAux> merge_transform(const ObjectParams& a, const ObjectParams& b) {
  double sa = a.scale, sb = b.scale;
  ObjectParams h = a;
  h.scale = std::sqrt(sa * sa + sb * sb);
  h.center = {(sa * a.center.x + sb * b.center.x) / (sa + sb), (sa * a.center.y + sb * b.center.y) / (sa + sb)};
  SplitAux u;
  double dx = b.center.x - a.center.x, dy = b.center.y - a.center.y;
  u.u1 = std::hypot(dx, dy);
  u.u2 = wrap_angle(std::atan2(dy, dx));
  u.u3 = (sa * sa - sb * sb) / (sa * sa + sb * sb);
  u.kind = b.kind;
  u.rotation = b.rotation;
  u.pure = b.pure;
  return {h, u};
}

double split_log_jacobian(double s_h, double u1, double u3) {
  return std::log(u1) + std::log(s_h) - std::log(2.0) - 0.5 * std::log1p(-u3 * u3);
}

IntensityProposal IntensityProposal::from_pixels(const Image& img, const Raster& r) {
  long long n = 0;
  double s1 = 0, s2 = 0;
  for (std::size_t row = 0; row < r.spans.size(); ++row) {
    int y = r.y0 + int(row);
    for (int x = r.spans[row].x0; x < r.spans[row].x1; ++x) {
      double v = img.at(x, y);
      ++n;
      s1 += v;
      s2 += v * v;
    }
  }
  if (n < 2) return {128.0, 64.0, std::log(100.0), 1.5};
  double mean = s1 / n;
  double var = std::max((s2 - n * mean * mean) / (n - 1), 0.25);
  return {mean, std::sqrt(std::max(var, 1.0) / n) + 0.5, std::log(var), std::sqrt(2.0 / (n - 1)) + 0.1};
}

double IntensityProposal::log_density(double mu, double var) const {
  if (!(var > 0)) return kNegInf;
  double lv = std::log(var);
  return log_normal_pdf(mu, mean_center, mean_sd) + log_normal_pdf(lv, logvar_center, logvar_sd) - lv;
}

std::pair<double, double> IntensityProposal::draw(Rng& rng) const {
  double mu = rng.normal(mean_center, mean_sd);
  double lv = rng.normal(logvar_center, logvar_sd);
  return {mu, std::exp(lv)};
}

// ---------------------------------------------------------------- sampler

Sampler::Sampler(const Image& img, const PriorConfig& prior, const SamplerConfig& cfg, ChainState init)
    : img_(&img), prior_(prior), cfg_(cfg), frame_(img.frame()), st_(std::move(init)) {
  prior_.validate();
  cfg_.validate();
  if (st_.ints.mean.size() != st_.cfg.m() + 1 || st_.ints.variance.size() != st_.cfg.m() + 1)
    throw std::invalid_argument("intensity vectors must have m + 1 entries");
  px_ = PixelState(img, rasters_of(st_.cfg, frame_), st_.ints.mean);
  log_w_ = std::log(center_measure(prior_, frame_));
}

double Sampler::log_marks_prior(const Configuration& c) const {
  double lp = 0;
  for (const auto& o : c.objects) {
    if (!center_in_support(o.center, prior_, frame_)) return kNegInf;
    lp += log_mark_prior(o, prior_);
  }
  return lp;
}

double Sampler::log_ints_prior(const IntensityParams& ints) const {
  return cfg_.update_intensities ? log_intensity_prior_bounded(ints, prior_.intensity) : 0.0;
}

double Sampler::log_gamma_term(const InteractionParams& g) const {
  double lp = 0;
  if (cfg_.gamma1_random) lp += log_lognormal(g.gamma1, prior_.gamma1);
  if (cfg_.gamma2_random) lp += log_lognormal(g.gamma2, prior_.gamma2);
  return lp;
}

double Sampler::log_post(const ChainState& s, const PixelState& px) const {
  if (s.cfg.m() > cfg_.m_max) return kNegInf;
  for (std::size_t i = 0; i < px.m(); ++i)
    if (!visible(px.raster(i))) return kNegInf;
  double lp = log_marks_prior(s.cfg);
  if (lp == kNegInf) return lp;
  lp += log_ints_prior(s.ints);
  if (lp == kNegInf) return lp;
  lp += log_interaction(s.cfg.m(), px.coverage(), s.gamma, prior_);
  if (lp == kNegInf) return lp;
  return lp + log_gamma_term(s.gamma) + px.log_likelihood(s.ints);
}

double Sampler::log_posterior() const { return log_post(st_, px_); }

double Sampler::log_posterior_of(const ChainState& s) const {
  PixelState px(*img_, rasters_of(s.cfg, frame_), s.ints.mean);
  return log_post(s, px);
}

bool Sampler::accept(double la, Rng& rng) const {
  double u = rng.uniform();
  return std::log(u) < la;
}

MoveRecord Sampler::geometry_step(std::size_t i, const ObjectParams& prop, MoveKind kind, double log_q, Rng& rng) {
  MoveRecord rec{kind, kNegInf, false, st_.cfg.m()};
  const ObjectParams& old = st_.cfg.objects[i];
  double lp_new = center_in_support(prop.center, prior_, frame_) ? log_mark_prior(prop, prior_) : kNegInf;
  if (lp_new == kNegInf) {
    accept(kNegInf, rng);
    return rec;
  }
  Raster r = rasterize(prop, frame_);
  if (!visible(r)) {
    accept(kNegInf, rng);
    return rec;
  }
  auto d = px_.propose_raster(i, std::move(r), st_.ints.mean);
  CoverageStats c0 = px_.coverage();
  CoverageStats c1{c0.multi + d.d_multi, c0.pair_sum + d.d_pair, px_.triple() + d.d_triple > 0 ? 3 : 0};
  double la = px_.delta_loglik(d, st_.ints, st_.ints) + log_interaction(st_.cfg.m(), c1, st_.gamma, prior_) -
              log_interaction(st_.cfg.m(), c0, st_.gamma, prior_) + lp_new - log_mark_prior(old, prior_) + log_q;
  rec.log_ratio = la;
  if (accept(la, rng)) {
    px_.commit(std::move(d));
    st_.cfg.objects[i] = prop;
    rec.accepted = true;
  }
  return rec;
}

void Sampler::sweep(Rng& rng, MoveStats* stats) {
  auto note = [&](const MoveRecord& r) {
    if (stats) stats->add(r);
  };
  const StepSizes& st = cfg_.steps;
  if (cfg_.update_marks) {
    for (std::size_t i = 0; i < st_.cfg.m(); ++i) {
      if (prior_.lattice) {
        ObjectParams p = st_.cfg.objects[i];
        p.center = prior_.lattice->centers[rng.index(prior_.lattice->centers.size())];
        note(geometry_step(i, p, MoveKind::Center, 0.0, rng));
        p = st_.cfg.objects[i];
        p.scale = prior_.lattice->scales[rng.index(prior_.lattice->scales.size())];
        note(geometry_step(i, p, MoveKind::Scale, 0.0, rng));
        continue;
      }
      ObjectParams p = st_.cfg.objects[i];
      p.center.x += rng.normal(0, st.center);
      p.center.y += rng.normal(0, st.center);
      note(geometry_step(i, p, MoveKind::Center, 0.0, rng));
      p = st_.cfg.objects[i];
      p.scale += rng.normal(0, st.scale);
      note(geometry_step(i, p, MoveKind::Scale, 0.0, rng));
      if (has_rotation(st_.cfg.objects[i].kind)) {
        p = st_.cfg.objects[i];
        p.rotation = wrap_angle(p.rotation + rng.normal(0, st.rotation));
        note(geometry_step(i, p, MoveKind::Rotation, 0.0, rng));
      }
      if (has_pure(st_.cfg.objects[i].kind)) {
        p = st_.cfg.objects[i];
        p.pure += rng.normal(0, st.pure);
        note(geometry_step(i, p, MoveKind::Pure, 0.0, rng));
      }
    }
  }
  if (!cfg_.update_intensities) return;
  const IntensitySupport& sup = prior_.intensity;
  for (std::size_t k = 0; k <= st_.cfg.m(); ++k) {
    // mean
    {
      double mu = st_.ints.mean[k] + rng.normal(0, st.mean);
      MoveRecord rec{MoveKind::Mean, kNegInf, false, st_.cfg.m()};
      if (sup.contains(mu, st_.ints.variance[k])) {
        IntensityParams after = st_.ints;
        after.mean[k] = mu;
        PixelState::Delta d;
        if (k > 0) d = px_.propose_mean(k - 1, mu, st_.ints.mean);
        rec.log_ratio = px_.delta_loglik(d, st_.ints, after, {int(k)});
        if (accept(rec.log_ratio, rng)) {
          px_.commit(std::move(d));
          st_.ints.mean[k] = mu;
          rec.accepted = true;
        }
      } else {
        accept(kNegInf, rng);
      }
      note(rec);
    }
    // variance, log-scale walk; the 1/var prior cancels the proposal Jacobian
    {
      double var = st_.ints.variance[k] * std::exp(rng.normal(0, st.log_variance));
      MoveRecord rec{MoveKind::Variance, kNegInf, false, st_.cfg.m()};
      if (sup.contains(st_.ints.mean[k], var)) {
        const auto& s = px_.stats(int(k));
        double mu = st_.ints.mean[k];
        rec.log_ratio = gaussian_block_loglik(s.n, s.s1, s.s2, mu, var) -
                        gaussian_block_loglik(s.n, s.s1, s.s2, mu, st_.ints.variance[k]);
        if (accept(rec.log_ratio, rng)) {
          st_.ints.variance[k] = var;
          rec.accepted = true;
        }
      } else {
        accept(kNegInf, rng);
      }
      note(rec);
    }
  }
}

double Sampler::log_swap_ratio(std::size_t j, const ObjectParams& prop) const {
  const ObjectParams& old = st_.cfg.objects[j];
  if (prop == old) return 0.0;
  double lp_new = log_mark_prior(prop, prior_);
  if (lp_new == kNegInf) return kNegInf;
  Raster r = rasterize(prop, frame_);
  if (!visible(r)) return kNegInf;
  auto d = px_.propose_raster(j, std::move(r), st_.ints.mean);
  CoverageStats c0 = px_.coverage();
  CoverageStats c1{c0.multi + d.d_multi, c0.pair_sum + d.d_pair, px_.triple() + d.d_triple > 0 ? 3 : 0};
  double la = px_.delta_loglik(d, st_.ints, st_.ints) + log_interaction(st_.cfg.m(), c1, st_.gamma, prior_) -
              log_interaction(st_.cfg.m(), c0, st_.gamma, prior_) + lp_new - log_mark_prior(old, prior_);
  // template proposal pi(T*), reverse pi(T); unmatched parameters drawn from / returned to their priors
  double lt = -std::log(double(prior_.templates.size()));
  double q_fwd = lt, q_rev = lt;
  if (has_pure(prop.kind)) q_fwd += log_beta_density(prop.pure, prior_.pure_prior(prop.kind));
  if (has_pure(old.kind)) q_rev += log_beta_density(old.pure, prior_.pure_prior(old.kind));
  if (has_rotation(prop.kind) && !has_rotation(old.kind)) q_fwd += std::log(rotation_density_full(prop.rotation));
  if (has_rotation(old.kind) && !has_rotation(prop.kind)) q_rev += std::log(rotation_density_full(old.rotation));
  return la + q_rev - q_fwd;
}

MoveRecord Sampler::swap_move(std::size_t j, Rng& rng) {
  MoveRecord rec{MoveKind::Swap, 0.0, true, st_.cfg.m()};
  const ObjectParams old = st_.cfg.objects[j];
  ObjectParams p = old;
  p.kind = prior_.templates[rng.index(prior_.templates.size())];
  if (p.kind == old.kind) {
    rng.uniform();
    return rec;
  }
  if (!has_rotation(p.kind))
    p.rotation = 0.0;
  else if (!has_rotation(old.kind))
    p.rotation = sample_rotation_full(rng);
  p.pure = has_pure(p.kind) ? sample_pure(p.kind, prior_, rng) : 0.0;
  rec.log_ratio = log_swap_ratio(j, p);
  rec.accepted = accept(rec.log_ratio, rng);
  if (rec.accepted) {
    px_.commit(px_.propose_raster(j, rasterize(p, frame_), st_.ints.mean));
    st_.cfg.objects[j] = p;
  }
  return rec;
}

// ---------------------------------------------------------------- birth / death

void Sampler::apply_birth(const ObjectParams& o, double mu, double var) {
  st_.cfg.objects.push_back(o);
  st_.ints.mean.push_back(mu);
  st_.ints.variance.push_back(var);
  px_.append_object(rasterize(o, frame_), st_.ints.mean);
}

void Sampler::apply_death(std::size_t j) {
  swap_remove(st_.cfg.objects, j);
  swap_remove(st_.ints.mean, j + 1);
  swap_remove(st_.ints.variance, j + 1);
  px_.remove_object(j, st_.ints.mean);
}

double Sampler::log_birth_ratio(const ObjectParams& o, double mu, double var) const {
  std::size_t m = st_.cfg.m();
  if (m + 1 > cfg_.m_max) return kNegInf;
  if (!center_in_support(o.center, prior_, frame_)) return kNegInf;
  double lq = log_mark_prior(o, prior_);
  if (lq == kNegInf) return kNegInf;
  lq -= log_w_;
  Raster r = rasterize(o, frame_);
  if (!visible(r)) return kNegInf;
  if (cfg_.update_intensities) lq += IntensityProposal::from_pixels(*img_, r).log_density(mu, var);
  Sampler next(*this);
  next.apply_birth(o, mu, var);
  double d = next.log_posterior() - log_posterior();
  return d - lq + std::log(cfg_.moves.death) - std::log(cfg_.moves.birth) - std::log(double(m + 1));
}

double Sampler::log_death_ratio(std::size_t j) const {
  std::size_t m = st_.cfg.m();
  const ObjectParams& o = st_.cfg.objects[j];
  double lq = log_mark_prior(o, prior_) - log_w_;
  if (cfg_.update_intensities)
    lq += IntensityProposal::from_pixels(*img_, px_.raster(j)).log_density(st_.ints.mean[j + 1], st_.ints.variance[j + 1]);
  Sampler next(*this);
  next.apply_death(j);
  double d = next.log_posterior() - log_posterior();
  return d + lq - std::log(cfg_.moves.death) + std::log(cfg_.moves.birth) + std::log(double(m));
}

MoveRecord Sampler::birth_move(Rng& rng) {
  MoveRecord rec{MoveKind::Birth, kNegInf, false, st_.cfg.m()};
  ObjectParams o = sample_mark_prior(-1, prior_, frame_, rng);
  double mu = cfg_.fixed_mean, var = cfg_.fixed_variance;
  if (cfg_.update_intensities) {
    auto q = IntensityProposal::from_pixels(*img_, rasterize(o, frame_));
    std::tie(mu, var) = q.draw(rng);
  }
  rec.log_ratio = log_birth_ratio(o, mu, var);
  if (accept(rec.log_ratio, rng)) {
    apply_birth(o, mu, var);
    rec.accepted = true;
  }
  rec.m_after = st_.cfg.m();
  return rec;
}

MoveRecord Sampler::death_move(Rng& rng) {
  MoveRecord rec{MoveKind::Death, kNegInf, false, st_.cfg.m()};
  if (st_.cfg.m() == 0) return rec;
  std::size_t j = rng.index(st_.cfg.m());
  rec.log_ratio = log_death_ratio(j);
  if (accept(rec.log_ratio, rng)) {
    apply_death(j);
    rec.accepted = true;
  }
  rec.m_after = st_.cfg.m();
  return rec;
}

// ---------------------------------------------------------------- split / merge

std::vector<std::pair<std::size_t, std::size_t>> Sampler::merge_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const auto& ob = st_.cfg.objects;
  for (std::size_t i = 0; i < ob.size(); ++i)
    for (std::size_t j = i + 1; j < ob.size(); ++j) {
      double d = std::hypot(ob[i].center.x - ob[j].center.x, ob[i].center.y - ob[j].center.y);
      if (d < cfg_.neighbor_distance_factor * (ob[i].scale + ob[j].scale)) out.push_back({i, j});
    }
  return out;
}

double Sampler::log_aux_density(const SplitAux& u) const {
  if (!(u.u1 > 0 && u.u1 < 2 * prior_.s_max)) return kNegInf;
  if (!(u.u3 > -1 && u.u3 < 1)) return kNegInf;
  if (!prior_.allows(u.kind)) return kNegInf;
  double d2 = rotation_density_full(u.u2);
  if (!(d2 > 0)) return kNegInf;
  double lq = -std::log(2 * prior_.s_max) + std::log(d2) - std::log(2.0) - std::log(double(prior_.templates.size()));
  if (has_rotation(u.kind)) {
    double d4 = rotation_density_full(u.rotation);
    if (!(d4 > 0)) return kNegInf;
    lq += std::log(d4);
  }
  if (has_pure(u.kind)) lq += log_beta_density(u.pure, prior_.pure_prior(u.kind));
  return lq;
}

double Sampler::log_split_ratio(std::size_t h, const SplitAux& u) const {
  std::size_t m = st_.cfg.m();
  if (prior_.lattice || m + 1 > cfg_.m_max) return kNegInf;
  double lq = log_aux_density(u);
  if (lq == kNegInf) return kNegInf;
  auto [a, b] = split_transform(st_.cfg.objects[h], u);
  if (!(u.u1 < cfg_.neighbor_distance_factor * (a.scale + b.scale))) return kNegInf;
  Raster ra = rasterize(a, frame_), rb = rasterize(b, frame_);
  if (!visible(ra) || !visible(rb)) return kNegInf;
  if (cfg_.update_intensities) lq += IntensityProposal::from_pixels(*img_, rb).log_density(u.mean, u.variance);
  Sampler next(*this);
  next.px_.commit(next.px_.propose_raster(h, std::move(ra), next.st_.ints.mean));
  next.st_.cfg.objects[h] = a;
  next.apply_birth(b, cfg_.update_intensities ? u.mean : cfg_.fixed_mean,
                   cfg_.update_intensities ? u.variance : cfg_.fixed_variance);
  double d = next.log_posterior() - log_posterior();
  double n_pairs = double(next.merge_pairs().size());
  return d + std::log(cfg_.moves.merge) - std::log(n_pairs) - std::log(2.0) - std::log(cfg_.moves.split) +
         std::log(double(m)) - lq + split_log_jacobian(st_.cfg.objects[h].scale, u.u1, u.u3);
}

double Sampler::log_merge_ratio(std::size_t ia, std::size_t ib) const {
  if (prior_.lattice || ia == ib) return kNegInf;
  auto pairs = merge_pairs();
  std::size_t lo = std::min(ia, ib), hi = std::max(ia, ib);
  if (std::find(pairs.begin(), pairs.end(), std::make_pair(lo, hi)) == pairs.end()) return kNegInf;
  const ObjectParams& a = st_.cfg.objects[ia];
  const ObjectParams& b = st_.cfg.objects[ib];
  auto [h, u] = merge_transform(a, b);
  u.mean = st_.ints.mean[ib + 1];
  u.variance = st_.ints.variance[ib + 1];
  double lq = log_aux_density(u);
  if (lq == kNegInf) return kNegInf;
  if (cfg_.update_intensities) lq += IntensityProposal::from_pixels(*img_, px_.raster(ib)).log_density(u.mean, u.variance);
  Raster rh = rasterize(h, frame_);
  if (!visible(rh)) return kNegInf;
  Sampler next(*this);
  next.px_.commit(next.px_.propose_raster(ia, std::move(rh), next.st_.ints.mean));
  next.st_.cfg.objects[ia] = h;
  next.apply_death(ib);
  double d = next.log_posterior() - log_posterior();
  std::size_t m_new = st_.cfg.m() - 1;
  return d + std::log(cfg_.moves.split) - std::log(double(m_new)) + lq - std::log(cfg_.moves.merge) +
         std::log(double(pairs.size())) + std::log(2.0) - split_log_jacobian(h.scale, u.u1, u.u3);
}

MoveRecord Sampler::split_move(Rng& rng) {
  MoveRecord rec{MoveKind::Split, kNegInf, false, st_.cfg.m()};
  if (st_.cfg.m() == 0 || prior_.lattice) return rec;
  std::size_t h = rng.index(st_.cfg.m());
  SplitAux u;
  u.u1 = rng.uniform(0, 2 * prior_.s_max);
  u.u2 = sample_rotation_full(rng);
  u.u3 = rng.uniform(-1, 1);
  u.kind = prior_.templates[rng.index(prior_.templates.size())];
  u.rotation = has_rotation(u.kind) ? sample_rotation_full(rng) : 0.0;
  u.pure = sample_pure(u.kind, prior_, rng);
  if (cfg_.update_intensities) {
    auto [a, b] = split_transform(st_.cfg.objects[h], u);
    std::tie(u.mean, u.variance) = IntensityProposal::from_pixels(*img_, rasterize(b, frame_)).draw(rng);
  }
  rec.log_ratio = log_split_ratio(h, u);
  if (accept(rec.log_ratio, rng)) {
    auto [a, b] = split_transform(st_.cfg.objects[h], u);
    px_.commit(px_.propose_raster(h, rasterize(a, frame_), st_.ints.mean));
    st_.cfg.objects[h] = a;
    apply_birth(b, cfg_.update_intensities ? u.mean : cfg_.fixed_mean,
                cfg_.update_intensities ? u.variance : cfg_.fixed_variance);
    rec.accepted = true;
  }
  rec.m_after = st_.cfg.m();
  return rec;
}

MoveRecord Sampler::merge_move(Rng& rng) {
  MoveRecord rec{MoveKind::Merge, kNegInf, false, st_.cfg.m()};
  if (st_.cfg.m() < 2 || prior_.lattice) return rec;
  auto pairs = merge_pairs();
  if (pairs.empty()) return rec;
  auto [i, j] = pairs[rng.index(pairs.size())];
  if (rng.uniform() < 0.5) std::swap(i, j);  // i is the marks parent
  rec.log_ratio = log_merge_ratio(i, j);
  if (accept(rec.log_ratio, rng)) {
    auto [h, u] = merge_transform(st_.cfg.objects[i], st_.cfg.objects[j]);
    px_.commit(px_.propose_raster(i, rasterize(h, frame_), st_.ints.mean));
    st_.cfg.objects[i] = h;
    apply_death(j);
    rec.accepted = true;
  }
  rec.m_after = st_.cfg.m();
  return rec;
}

// ---------------------------------------------------------------- gamma

double Sampler::log_partition_ratio(const std::vector<std::pair<std::size_t, CoverageStats>>& draws,
                                    const InteractionParams& from, const InteractionParams& to, const PriorConfig& p) {
  std::vector<double> terms;
  terms.reserve(draws.size());
  for (const auto& [m, c] : draws) {
    double a = log_interaction(m, c, to, p), b = log_interaction(m, c, from, p);
    terms.push_back(a == kNegInf ? kNegInf : a - b);
  }
  double mx = *std::max_element(terms.begin(), terms.end());
  if (mx == kNegInf) return kNegInf;
  double s = 0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s / double(terms.size()));
}

MoveRecord Sampler::update_gamma(Rng& rng, AippChain* aux, Rng* aux_rng, MoveStats* stats) {
  MoveRecord rec{MoveKind::Gamma, 0.0, false, st_.cfg.m()};
  if (!cfg_.gamma1_random && !cfg_.gamma2_random) return rec;
  InteractionParams g = st_.gamma, gp = g;
  double lj = 0;
  if (cfg_.gamma1_random) {
    double e = rng.normal(0, cfg_.steps.log_gamma);
    gp.gamma1 = g.gamma1 * std::exp(e);
    lj += e;
  }
  if (cfg_.gamma2_random) {
    double e = rng.normal(0, cfg_.steps.log_gamma);
    gp.gamma2 = g.gamma2 * std::exp(e);
    lj += e;
  }
  CoverageStats c = px_.coverage();
  std::size_t m = st_.cfg.m();
  rec.log_ratio = log_interaction(m, c, gp, prior_) - log_interaction(m, c, g, prior_) + log_gamma_term(gp) -
                  log_gamma_term(g) + lj;
  rec.accepted = accept(rec.log_ratio, rng);
  if (stats) stats->add(rec);
  if (!rec.accepted) return rec;
  if (cfg_.mcmh && aux && aux_rng) {
    // second stage: the ratio Z(g) / Z(g') estimated from prior draws at g
    std::vector<std::pair<std::size_t, CoverageStats>> draws;
    for (int k = 0; k < cfg_.mcmh_aux_count; ++k) {
      for (int s = 0; s < cfg_.aux_spacing; ++s) aux->birth_death_step(g, *aux_rng);
      draws.push_back({aux->m(), aux->coverage()});
    }
    MoveRecord ex{MoveKind::Exchange, -log_partition_ratio(draws, g, gp, prior_), false, m};
    ex.accepted = accept(ex.log_ratio, rng);
    if (stats) stats->add(ex);
    if (!ex.accepted) {
      rec.accepted = false;
      return rec;
    }
  }
  st_.gamma = gp;
  return rec;
}

void Sampler::iterate(Rng& rng, AippChain* aux, Rng& aux_rng, MoveStats* stats) {
  auto note = [&](const MoveRecord& r) {
    if (stats) stats->add(r);
  };
  if (cfg_.update_marks || cfg_.update_intensities) sweep(rng, stats);
  if (cfg_.swap && cfg_.update_marks)
    for (std::size_t j = 0; j < st_.cfg.m(); ++j) note(swap_move(j, rng));
  const MoveProbabilities& p = cfg_.moves;
  double u = rng.uniform();
  if (u < p.birth)
    note(birth_move(rng));
  else if (u < p.birth + p.death)
    note(death_move(rng));
  else if (u < p.birth + p.death + p.split)
    note(split_move(rng));
  else if (u < p.birth + p.death + p.split + p.merge)
    note(merge_move(rng));
  update_gamma(rng, aux, &aux_rng, stats);
  ++st_.iteration;
}

// ---------------------------------------------------------------- driver

ChainSummary run_chain(const Image& img, const PriorConfig& prior, const SamplerConfig& cfg, const ChainState& init,
                       const ChainSinks& sinks, const Checkpoint* resume) {
  Sampler s(img, prior, cfg, resume ? resume->state : init);
  Rng rng = Rng::stream(cfg.seed, "chain");
  Rng aux_rng = Rng::stream(cfg.seed, "aux");
  bool exchange = cfg.mcmh && (cfg.gamma1_random || cfg.gamma2_random);
  AippChain aux(prior, img.frame(), cfg.m_max, resume ? resume->aux_config : Configuration{});
  if (resume) {
    rng.set_state(resume->chain_rng);
    aux_rng.set_state(resume->aux_rng);
  } else if (exchange) {
    for (int k = 0; k < 100 * cfg.aux_spacing * cfg.mcmh_aux_count / 10; ++k)
      aux.birth_death_step(init.gamma, aux_rng);
  }
  ChainSummary sum;
  bool saved = false;
  while (s.state().iteration < std::uint64_t(cfg.iterations)) {
    saved = false;
    s.iterate(rng, exchange ? &aux : nullptr, aux_rng, &sum.stats);
    long long it = (long long)s.state().iteration;
    if (it > cfg.burn_in && (it - cfg.burn_in) % cfg.thinning == 0) {
      ++sum.samples;
      if (sinks.on_sample) {
        const ChainState& st = s.state();
        sinks.on_sample(PosteriorSample{st.iteration, st.gamma, s.log_posterior(), st.cfg, st.ints});
      }
    }
    if (cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0 && sinks.on_checkpoint) {
      sinks.on_checkpoint(Checkpoint{s.state(), rng.state(), aux_rng.state(), aux.config()});
      saved = true;
    }
  }
  // the final state is always resumable
  if (sinks.on_checkpoint && !saved)
    sinks.on_checkpoint(Checkpoint{s.state(), rng.state(), aux_rng.state(), aux.config()});
  sum.final_state = s.state();
  return sum;
}

}  // namespace mppseg

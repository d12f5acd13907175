#include "mppseg/initializer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>

#include "mppseg/aipp_chain.hpp"
#include "mppseg/sampler.hpp"

namespace mppseg {

namespace {

constexpr double kFar = 1e20;

// 1-D squared distance transform of sampled function f (lower envelope of parabolas)
void edt_1d(const std::vector<double>& f, std::vector<double>& d) {
  int n = int(f.size());
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  for (int q = 1; q < n; ++q) {
    double s;
    for (;;) {
      int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
      if (s <= z[k] && k > 0)
        --k;
      else
        break;
    }
    if (s <= z[k]) {  // k == 0
      v[0] = q;
      z[0] = -kFar;
      z[1] = kFar;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }
  d.assign(n, 0);
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

Image median3(const Image& img) {
  Image out = img;
  std::array<int, 9> w{};
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          int xx = std::clamp(x + dx, 0, img.width - 1), yy = std::clamp(y + dy, 0, img.height - 1);
          w[n++] = img.at(xx, yy);
        }
      std::nth_element(w.begin(), w.begin() + 4, w.end());
      out.at(x, y) = w[4];
    }
  return out;
}

// labels 8-connected components of `on` pixels restricted to `within` (if given)
std::vector<std::vector<std::size_t>> components(const std::vector<std::uint8_t>& on, int w, int h) {
  std::vector<int> label(on.size(), -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < on.size(); ++s) {
    if (!on[s] || label[s] >= 0) continue;
    int id = int(out.size());
    out.emplace_back();
    std::deque<std::size_t> q{s};
    label[s] = id;
    while (!q.empty()) {
      std::size_t p = q.front();
      q.pop_front();
      out[id].push_back(p);
      int x = int(p % w), y = int(p / w);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
          std::size_t r = std::size_t(yy) * w + xx;
          if (on[r] && label[r] < 0) {
            label[r] = id;
            q.push_back(r);
          }
        }
    }
    std::sort(out[id].begin(), out[id].end());
  }
  return out;
}

Mask from_pixels(const std::vector<std::size_t>& px, int w, int h) {
  Mask m(w, h);
  for (auto p : px) m.on[p] = 1;
  return m;
}


double iou(const Mask& region, std::size_t area, const ObjectParams& o, const Frame& f) {
  Raster r = rasterize(o, f);
  long long inter = 0, tot = r.count();
  for (std::size_t row = 0; row < r.spans.size(); ++row)
    for (int x = r.spans[row].x0; x < r.spans[row].x1; ++x) inter += region.at(x, r.y0 + int(row));
  return double(inter) / double(tot + (long long)area - inter);
}

bool admissible(const ObjectParams& o, const PriorConfig& prior, const Frame& f) {
  if (!(o.scale > prior.s_min && o.scale < prior.s_max)) return false;
  if (has_pure(o.kind)) {
    const auto& b = prior.pure_prior(o.kind);
    if (!(o.pure > b.lo && o.pure < b.hi)) return false;
  }
  return center_in_support(o.center, prior, f);
}

// coordinate pattern search on IoU; lets objects cut by the frame move outward and grow
ObjectParams refine(const Mask& region, std::size_t area, ObjectParams o, double score, const PriorConfig& prior,
                    const Frame& f) {
  // directions over (x, y, s, theta, g); the mixed ones let a clipped object slide out while growing
  static const double dirs[][5] = {
      {1, 0, 0, 0, 0}, {0, 1, 0, 0, 0}, {0, 0, 1, 0, 0}, {0, 0, 0, 1, 0}, {0, 0, 0, 0, 1},
      {1, 0, 1, 0, 0}, {1, 0, -1, 0, 0}, {0, 1, 1, 0, 0}, {0, 1, -1, 0, 0}, {1, 1, 0, 0, 0}, {1, -1, 0, 0, 0},
  };
  double step[5] = {2.0, 2.0, 0.05 * o.scale, 0.1, 0.1};
  for (int round = 0; round < 200; ++round) {
    bool improved = false;
    for (const auto& d : dirs) {
      if (d[3] != 0 && !has_rotation(o.kind)) continue;
      if (d[4] != 0 && !has_pure(o.kind)) continue;
      for (double sign : {1.0, -1.0}) {
        ObjectParams t = o;
        t.center.x += sign * d[0] * step[0];
        t.center.y += sign * d[1] * step[1];
        t.scale += sign * d[2] * step[2];
        t.rotation = has_rotation(o.kind) ? wrap_angle(t.rotation + sign * d[3] * step[3]) : 0.0;
        t.pure += sign * d[4] * step[4];
        if (!admissible(t, prior, f)) continue;
        double sc = iou(region, area, t, f);
        if (sc > score) {
          score = sc;
          o = t;
          improved = true;
        }
      }
    }
    if (!improved) {
      bool small = true;
      for (double& st : step) {
        st /= 2;
        small = small && st < 1e-2;
      }
      if (small) break;
    }
  }
  return o;
}

// Template, rotation, pure parameter and scale with the best overlap (IoU) with the region.
struct Start {
  Point c;
  double s0;
};

ObjectParams best_fit(const Mask& region, const std::vector<Start>& starts, double theta0, double elong,
                      const PriorConfig& prior, const Frame& f) {
  const double eps = 1e-6;
  std::size_t area = region.count();
  ObjectParams best;
  double best_iou = -1;
  const int nth = 72;
  for (auto k : prior.templates) {
    std::vector<double> pures{0.0};
    if (k == TemplateKind::Ellipse) {
      const auto& b = prior.ellipse;
      pures = {std::clamp(elong, b.lo + eps, b.hi - eps)};
      for (int i = 1; i <= 4; ++i) pures.push_back(b.lo + (b.hi - b.lo) * i / 5.0);
    } else if (k == TemplateKind::Triangle) {
      const auto& b = prior.triangle;
      pures.clear();
      for (int i = 1; i <= 5; ++i) pures.push_back(b.lo + (b.hi - b.lo) * i / 6.0);
    }
    std::vector<double> thetas{0.0};
    if (k == TemplateKind::Ellipse) {
      // moment angle plus a coarse grid; clipped regions can mislead the moments
      thetas = {theta0};
      for (int i = 0; i < nth / 2; ++i) thetas.push_back(wrap_angle(-kPi / 2 + kPi * (i + 1) / (nth / 2)));
    } else if (has_rotation(k)) {
      double period = k == TemplateKind::Square ? kPi / 2 : 2 * kPi;
      thetas.clear();
      for (int i = 0; i < nth; ++i) thetas.push_back(wrap_angle(-kPi + period * (i + 1) / nth));
    }
    for (const auto& st : starts) {
    ObjectParams kb;
    double kb_iou = -1;
    for (double g : pures)
      for (double th : thetas)
        for (double fs : {0.92, 0.96, 1.0, 1.04, 1.08}) {
          ObjectParams o;
          o.center = st.c;
          o.kind = k;
          o.scale = st.s0 * fs;
          o.rotation = has_rotation(k) ? th : 0.0;
          o.pure = has_pure(k) ? g : 0.0;
          if (!admissible(o, prior, f)) continue;
          double sc = iou(region, area, o, f);
          if (sc > kb_iou) {
            kb_iou = sc;
            kb = o;
          }
        }
    if (kb_iou < 0) continue;
    kb = refine(region, area, kb, kb_iou, prior, f);
    double sc = iou(region, area, kb, f);
    if (sc > best_iou) {
      best_iou = sc;
      best = kb;
    }
    }
  }
  if (best_iou < 0) {
    best.center = starts.front().c;
    best.scale = std::clamp(starts.front().s0, prior.s_min + 1e-3, prior.s_max - 1e-3);
    best.kind = prior.templates.front();
    if (has_pure(best.kind)) best.pure = 0.5 * (prior.pure_prior(best.kind).lo + prior.pure_prior(best.kind).hi);
  }
  return best;
}

}  // namespace

std::size_t Mask::count() const {
  std::size_t n = 0;
  for (auto v : on) n += v != 0;
  return n;
}

int otsu_threshold(const Image& img) {
  std::array<double, 257> hist{};
  for (int v : img.values) hist[std::clamp(v, 1, 256)] += 1;
  double total = double(img.values.size()), sum = 0;
  for (int v = 1; v <= 256; ++v) sum += v * hist[v];
  double w0 = 0, s0 = 0, best = 0;
  int thr = -1;
  for (int t = 1; t < 256; ++t) {
    w0 += hist[t];
    s0 += t * hist[t];
    double w1 = total - w0;
    if (w0 == 0 || w1 == 0) continue;
    double m0 = s0 / w0, m1 = (sum - s0) / w1;
    double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      thr = t;
    }
  }
  return thr;
}

Mask binarize(const Image& img, const InitOptions& opt) {
  Image src = opt.median_filter ? median3(img) : img;
  Mask m(img.width, img.height);
  int t = otsu_threshold(src);
  if (t < 0) return m;
  for (std::size_t p = 0; p < src.values.size(); ++p) m.on[p] = src.values[p] <= t;
  // drop speckle
  Mask clean(img.width, img.height);
  for (const auto& c : components(m.on, m.width, m.height))
    if (int(c.size()) >= opt.min_region_area)
      for (auto p : c) clean.on[p] = 1;
  return clean;
}

std::vector<double> distance_transform(const Mask& m) {
  int w = m.width, h = m.height;
  std::vector<double> g(std::size_t(w) * h);
  for (std::size_t p = 0; p < g.size(); ++p) g[p] = m.on[p] ? kFar : 0.0;
  std::vector<double> f, d;
  for (int x = 0; x < w; ++x) {
    f.resize(h);
    for (int y = 0; y < h; ++y) f[y] = g[std::size_t(y) * w + x];
    edt_1d(f, d);
    for (int y = 0; y < h; ++y) g[std::size_t(y) * w + x] = d[y];
  }
  for (int y = 0; y < h; ++y) {
    f.assign(g.begin() + std::size_t(y) * w, g.begin() + std::size_t(y + 1) * w);
    edt_1d(f, d);
    for (int x = 0; x < w; ++x) g[std::size_t(y) * w + x] = std::sqrt(std::min(d[x], kFar));
  }
  return g;
}

std::vector<Mask> connected_components(const Mask& m, int min_area) {
  std::vector<Mask> out;
  for (const auto& c : components(m.on, m.width, m.height))
    if (int(c.size()) >= min_area) out.push_back(from_pixels(c, m.width, m.height));
  return out;
}

// Each component is cut into lobes: erode by thresholding the distance map at
// increasing levels, keep the level with the most persistent pieces, then grow
// those markers back over the component by breadth-first search.
std::vector<Mask> decompose_regions(const Mask& m, const InitOptions& opt) {
  int w = m.width, h = m.height;
  std::vector<Mask> out;
  if (m.count() == 0) return out;
  std::vector<double> dist = distance_transform(m);
  for (const auto& comp : components(m.on, w, h)) {
    double peak = 0;
    for (auto p : comp) peak = std::max(peak, dist[p]);
    std::vector<std::vector<std::size_t>> best;
    for (double level = 1; level < peak; level += 1) {
      std::vector<std::uint8_t> on(m.on.size(), 0);
      for (auto p : comp) on[p] = dist[p] >= level;
      std::vector<std::vector<std::size_t>> keep;
      for (auto& c : components(on, w, h)) {
        double top = 0;
        for (auto p : c) top = std::max(top, dist[p]);
        if (top >= level + opt.marker_persistence) keep.push_back(std::move(c));
      }
      if (keep.size() > best.size()) best = std::move(keep);
    }
    if (best.size() <= 1) {
      out.push_back(from_pixels(comp, w, h));
      continue;
    }
    std::vector<int> label(m.on.size(), -1);
    std::deque<std::size_t> q;
    for (std::size_t k = 0; k < best.size(); ++k)
      for (auto p : best[k]) {
        label[p] = int(k);
        q.push_back(p);
      }
    std::vector<std::uint8_t> in(m.on.size(), 0);
    for (auto p : comp) in[p] = 1;
    while (!q.empty()) {
      std::size_t p = q.front();
      q.pop_front();
      int x = int(p % w), y = int(p / w);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
          std::size_t r = std::size_t(yy) * w + xx;
          if (in[r] && label[r] < 0) {
            label[r] = label[p];
            q.push_back(r);
          }
        }
    }
    std::vector<std::vector<std::size_t>> parts(best.size());
    for (auto p : comp) parts[label[p]].push_back(p);
    for (const auto& part : parts)
      if (!part.empty()) out.push_back(from_pixels(part, w, h));
  }
  return out;
}

InitEstimate estimate_objects(const std::vector<Mask>& regions, const Image& img, const PriorConfig& prior, Rng&) {
  InitEstimate est;
  const IntensitySupport& sup = prior.intensity;
  std::vector<std::uint8_t> fg(img.values.size(), 0);
  est.ints.mean.push_back(0);
  est.ints.variance.push_back(0);
  for (const auto& r : regions) {
    double n = 0, sx = 0, sy = 0, sv = 0, sv2 = 0;
    for (int y = 0; y < r.height; ++y)
      for (int x = 0; x < r.width; ++x)
        if (r.at(x, y)) {
          double v = img.at(x, y);
          n += 1;
          sx += x;
          sy += y;
          sv += v;
          sv2 += v * v;
          fg[std::size_t(y) * r.width + x] = 1;
        }
    if (n < 2) continue;
    double cx = sx / n, cy = sy / n, cxx = 0, cyy = 0, cxy = 0;
    for (int y = 0; y < r.height; ++y)
      for (int x = 0; x < r.width; ++x)
        if (r.at(x, y)) {
          cxx += (x - cx) * (x - cx);
          cyy += (y - cy) * (y - cy);
          cxy += (x - cx) * (y - cy);
        }
    cxx /= n;
    cyy /= n;
    cxy /= n;
    double theta = 0.5 * std::atan2(2 * cxy, cxx - cyy);
    double tr = cxx + cyy, det = cxx * cyy - cxy * cxy;
    double disc = std::sqrt(std::max(tr * tr / 4 - det, 0.0));
    double elong = std::sqrt((tr / 2 + disc) / std::max(tr / 2 - disc, 1e-9));
    std::vector<Start> starts{{{cx, cy}, std::sqrt(n / kPi)}};
    // regions cut by the frame: the object may be centered on or beyond the edge
    bool side[4] = {false, false, false, false};
    for (int y = 0; y < r.height; ++y) {
      side[0] = side[0] || r.at(0, y);
      side[1] = side[1] || r.at(r.width - 1, y);
    }
    for (int x = 0; x < r.width; ++x) {
      side[2] = side[2] || r.at(x, 0);
      side[3] = side[3] || r.at(x, r.height - 1);
    }
    const double edge[4] = {-0.5, r.width - 0.5, -0.5, r.height - 0.5};
    for (int k = 0; k < 4; ++k) {
      if (!side[k]) continue;
      double d = k < 2 ? edge[k] - cx : edge[k] - cy;
      for (double t : {0.5, 1.0, 1.5})
        for (double g : {1.2, 1.4, 1.7}) {
          Point c{cx, cy};
          (k < 2 ? c.x : c.y) += t * d;
          starts.push_back({c, g * std::sqrt(n / kPi)});
        }
    }
    ObjectParams o = best_fit(r, starts, theta, elong, prior, img.frame());
    if (!center_in_support(o.center, prior, img.frame()) || log_mark_prior(o, prior) == -INFINITY) continue;
    if (rasterize(o, img.frame()).empty()) continue;
    Raster fp = rasterize(o, img.frame());
    double fn = 0, fs = 0, fs2 = 0;
    for (auto [x, y] : fp.pixels()) {
      double v = img.at(x, y);
      fn += 1, fs += v, fs2 += v * v;
    }
    if (fn >= 2) n = fn, sv = fs, sv2 = fs2;
    double mu = sv / n, var = (sv2 - n * mu * mu) / (n - 1);
    for (auto [x, y] : fp.pixels()) fg[std::size_t(y) * img.width + x] = 1;
    est.cfg.objects.push_back(o);
    est.ints.mean.push_back(std::clamp(mu, sup.mean_min, sup.mean_max));
    est.ints.variance.push_back(std::clamp(var, std::max(sup.var_min, 1.0), sup.var_max));
  }
  double n = 0, s = 0, s2 = 0;
  for (std::size_t p = 0; p < img.values.size(); ++p)
    if (!fg[p]) {
      n += 1;
      s += img.values[p];
      s2 += double(img.values[p]) * img.values[p];
    }
  if (n < 2) {
    n = 0, s = 0, s2 = 0;
    for (int v : img.values) n += 1, s += v, s2 += double(v) * v;
  }
  double mu = s / n, var = n > 1 ? (s2 - n * mu * mu) / (n - 1) : 1.0;
  est.ints.mean[0] = std::clamp(mu, sup.mean_min, sup.mean_max);
  est.ints.variance[0] = std::clamp(var, std::max(sup.var_min, 1.0), sup.var_max);
  est.m0 = est.cfg.m();
  return est;
}

InitEstimate morphological_init(const Image& img, const PriorConfig& prior, Rng& rng, const InitOptions& opt) {
  return estimate_objects(decompose_regions(binarize(img, opt), opt), img, prior, rng);
}

InitEstimate random_init(const Image& img, const PriorConfig& prior, const InteractionParams& gamma, Rng& rng) {
  AippChain chain(prior, img.frame(), 200);
  for (int k = 0; k < 2000; ++k) chain.birth_death_step(gamma, rng);
  InitEstimate est;
  est.cfg = chain.config();
  const IntensitySupport& sup = prior.intensity;
  double n = 0, s = 0, s2 = 0;
  for (int v : img.values) n += 1, s += v, s2 += double(v) * v;
  double mu = s / n, var = n > 1 ? (s2 - n * mu * mu) / (n - 1) : 1.0;
  est.ints.mean.push_back(std::clamp(mu, sup.mean_min, sup.mean_max));
  est.ints.variance.push_back(std::clamp(var, std::max(sup.var_min, 1.0), sup.var_max));
  for (const auto& o : est.cfg.objects) {
    auto q = IntensityProposal::from_pixels(img, rasterize(o, img.frame()));
    est.ints.mean.push_back(std::clamp(q.mean_center, sup.mean_min, sup.mean_max));
    est.ints.variance.push_back(std::clamp(std::exp(q.logvar_center), std::max(sup.var_min, 1.0), sup.var_max));
  }
  est.m0 = est.cfg.m();
  return est;
}

}  // namespace mppseg

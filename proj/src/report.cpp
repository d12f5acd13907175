#include "mppseg/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <tuple>

namespace mppseg {

namespace {

std::string num(double v, const char* f = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool straddles(const ObjectParams& o, const Frame& f) {
  for (const auto& p : landmarks(o))
    if (p.x < 0 || p.y < 0 || p.x > f.width - 1 || p.y > f.height - 1) return true;
  return false;
}

double quantile(const std::vector<double>& sorted, double q) {
  double pos = q * double(sorted.size() - 1);
  std::size_t lo = std::size_t(std::floor(pos));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - double(lo)) * (sorted[hi] - sorted[lo]);
}

// 3x5 digits, rows top to bottom, 3 bits per row
constexpr std::array<std::array<unsigned char, 5>, 10> kDigits{{
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
}};

void plot(Image& img, int x, int y, int v) {
  if (x >= 0 && y >= 0 && x < img.width && y < img.height) img.at(x, y) = v;
}

void line(Image& img, int x0, int y0, int x1, int y1, int v) {
  int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    plot(img, x0, y0, v);
    if (x0 == x1 && y0 == y1) break;
    int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void label(Image& img, int cx, int cy, std::size_t n, int v) {
  std::string s = std::to_string(n);
  int w = int(s.size()) * 4 - 1;
  int x0 = cx - w / 2, y0 = cy - 2;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const auto& g = kDigits[s[k] - '0'];
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 3; ++c)
        if (g[r] & (4 >> c)) plot(img, x0 + int(k) * 4 + c, y0 + r, v);
  }
}

}  // namespace

std::size_t map_index(const std::vector<PosteriorSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("map estimate of an empty sample set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const auto& a = samples[i];
    const auto& b = samples[best];
    if (a.log_post > b.log_post || (a.log_post == b.log_post && a.iteration < b.iteration)) best = i;
  }
  return best;
}

const PosteriorSample& map_estimate(const std::vector<PosteriorSample>& samples) {
  return samples[map_index(samples)];
}

std::vector<int> match_objects(const Configuration& ref, const Configuration& sample) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < ref.m(); ++i)
    for (std::size_t j = 0; j < sample.m(); ++j) {
      const auto& a = ref.objects[i];
      const auto& b = sample.objects[j];
      double d = std::hypot(a.center.x - b.center.x, a.center.y - b.center.y);
      if (d < std::max(a.scale, b.scale)) pairs.emplace_back(d, i, j);
    }
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> out(ref.m(), -1);
  std::vector<char> used(sample.m(), 0);
  for (const auto& [d, i, j] : pairs) {
    if (out[i] >= 0 || used[j]) continue;
    out[i] = int(j);
    used[j] = 1;
  }
  return out;
}

std::vector<ObjectSummary> classification_probabilities(const std::vector<PosteriorSample>& samples,
                                                        const PosteriorSample& ref, const Frame& f) {
  std::size_t m = ref.cfg.m();
  std::vector<std::array<long long, 4>> counts(m);
  std::vector<long long> matched(m, 0);
  for (const auto& s : samples) {
    auto match = match_objects(ref.cfg, s.cfg);
    for (std::size_t i = 0; i < m; ++i)
      if (match[i] >= 0) {
        ++counts[i][int(s.cfg.objects[match[i]].kind)];
        ++matched[i];
      }
  }
  std::vector<ObjectSummary> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto& o = out[i];
    o.index = i + 1;
    o.marks = ref.cfg.objects[i];
    o.mean = ref.ints.mean.at(i + 1);
    if (matched[i] > 0) {
      for (int k = 0; k < 4; ++k) o.probability[k] = double(counts[i][k]) / double(matched[i]);
    } else {
      o.probability[int(o.marks.kind)] = 1.0;
    }
    o.matched_fraction = samples.empty() ? 0.0 : double(matched[i]) / double(samples.size());
    o.low_confidence = o.matched_fraction < 0.5;
    o.aspect_ratio = aspect_ratio(o.marks);
    o.straddles = straddles(o.marks, f);
  }
  return out;
}

double reported_rotation(const ObjectParams& o) {
  double t = wrap_angle(o.rotation);
  if (o.kind == TemplateKind::Ellipse || o.kind == TemplateKind::Square) {
    if (t > kPi / 2) t -= kPi;
    if (t <= -kPi / 2) t += kPi;
  }
  return t;
}

HistField hist_field_from_name(const std::string& s) {
  if (s == "s") return HistField::Scale;
  if (s == "mu") return HistField::Mean;
  if (s == "g") return HistField::Pure;
  if (s == "T") return HistField::Template;
  throw std::invalid_argument("unknown histogram field '" + s + "' (expected s, mu, g or T)");
}

const char* hist_field_name(HistField f) {
  switch (f) {
    case HistField::Scale: return "s";
    case HistField::Mean: return "mu";
    case HistField::Pure: return "g";
    case HistField::Template: return "T";
  }
  return "?";
}

double freedman_diaconis_width(std::vector<double> v) {
  if (v.size() < 2) return 0;
  std::sort(v.begin(), v.end());
  double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  return 2 * iqr / std::cbrt(double(v.size()));
}

Histogram histogram(const PosteriorSample& s, HistField field, int bins) {
  Histogram h{field, {}, {}, {}};
  if (s.cfg.m() == 0) return h;
  if (field == HistField::Template) {
    h.counts.assign(4, 0);
    for (int k = 0; k < 4; ++k) h.labels.push_back(template_name(TemplateKind(k)));
    for (const auto& o : s.cfg.objects) ++h.counts[int(o.kind)];
    return h;
  }
  std::vector<double> v;
  for (std::size_t i = 0; i < s.cfg.m(); ++i) {
    const auto& o = s.cfg.objects[i];
    if (field == HistField::Scale) v.push_back(o.scale);
    if (field == HistField::Mean) v.push_back(s.ints.mean.at(i + 1));
    if (field == HistField::Pure && has_pure(o.kind)) v.push_back(o.pure);
  }
  if (v.empty()) return h;
  auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  double lo = *lo_it, hi = *hi_it;
  int k = bins;
  if (k <= 0) {
    double w = freedman_diaconis_width(v);
    k = (w > 0 && hi > lo) ? std::max(1, int(std::ceil((hi - lo) / w))) : 1;
  }
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  for (int b = 0; b <= k; ++b) h.edges.push_back(lo + (hi - lo) * b / k);
  h.counts.assign(k, 0);
  for (double x : v) {
    int b = int((x - lo) / (hi - lo) * k);
    ++h.counts[std::clamp(b, 0, k - 1)];
  }
  return h;
}

Image render_overlay(const Image& img, const Configuration& cfg) {
  Image out = img;
  const int ink = 256;
  for (std::size_t i = 0; i < cfg.m(); ++i) {
    auto lm = landmarks(cfg.objects[i]);
    for (std::size_t k = 0; k < lm.size(); ++k) {
      const auto& a = lm[k];
      const auto& b = lm[(k + 1) % lm.size()];
      line(out, int(std::lround(a.x)), int(std::lround(a.y)), int(std::lround(b.x)), int(std::lround(b.y)), ink);
    }
    const auto& c = cfg.objects[i].center;
    label(out, int(std::lround(c.x)), int(std::lround(c.y)), i + 1, ink);
  }
  return out;
}

std::string summary_table(const std::vector<ObjectSummary>& objs) {
  std::string t = "Object,Shape(T),Center(x,y),Size(s),Rotation(theta),g^r,Mean(mu)\n";
  for (const auto& o : objs) {
    const auto& m = o.marks;
    t += std::to_string(o.index) + "," + template_code(m.kind) + ",\"(" + num(m.center.x) + ", " +
         num(m.center.y) + ")\"," + num(m.scale) + "," + num(reported_rotation(m)) + "," +
         (has_pure(m.kind) ? num(m.pure) : std::string("-")) + "," + num(o.mean) + "\n";
  }
  return t;
}

std::string classification_table(const std::vector<ObjectSummary>& objs) {
  std::string t = "Object,p_circle,p_ellipse,p_triangle,p_square,matched_fraction,low_confidence,aspect_ratio,straddles\n";
  for (const auto& o : objs) {
    t += std::to_string(o.index);
    for (double p : o.probability) t += "," + num(p, "%.4f");
    t += "," + num(o.matched_fraction, "%.4f") + "," + (o.low_confidence ? "1" : "0") + "," +
         num(o.aspect_ratio, "%.4f") + "," + (o.straddles ? "1" : "0") + "\n";
  }
  return t;
}

std::string histogram_table(const Histogram& h) {
  std::string t;
  if (h.field == HistField::Template) {
    t = "template,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b) t += h.labels[b] + "," + std::to_string(h.counts[b]) + "\n";
    return t;
  }
  t = "lower,upper,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    t += num(h.edges[b], "%.6g") + "," + num(h.edges[b + 1], "%.6g") + "," + std::to_string(h.counts[b]) + "\n";
  return t;
}

}  // namespace mppseg

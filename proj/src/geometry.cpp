#include "mppseg/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace mppseg {

namespace {

// Walk a closed polyline and drop m points at equal arc-length steps,
// starting at vertex 0.
Landmarks resample_closed(const std::vector<Point>& poly, int m) {
  std::size_t n = poly.size();
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    cum[i + 1] = cum[i] + std::hypot(b.x - a.x, b.y - a.y);
  }
  double total = cum[n];
  Landmarks out;
  out.reserve(m);
  std::size_t seg = 0;
  for (int k = 0; k < m; ++k) {
    double target = total * k / m;
    while (seg + 1 < n && cum[seg + 1] <= target) ++seg;
    double len = cum[seg + 1] - cum[seg];
    double t = len > 0 ? (target - cum[seg]) / len : 0.0;
    const Point& a = poly[seg];
    const Point& b = poly[(seg + 1) % n];
    out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
  }
  return out;
}

class CircleTemplate final : public ShapeTemplate {
 public:
  TemplateKind kind() const override { return TemplateKind::Circle; }
  int pure_param_count() const override { return 0; }
  bool has_rotation() const override { return false; }
  Landmarks outline(double, int m) const override {
    Landmarks l(m);
    for (int k = 0; k < m; ++k) {
      double a = 2 * kPi * k / m;
      l[k] = {std::cos(a), std::sin(a)};
    }
    return l;
  }
};

// semi-axes sqrt(g), 1/sqrt(g)
class EllipseTemplate final : public ShapeTemplate {
 public:
  TemplateKind kind() const override { return TemplateKind::Ellipse; }
  int pure_param_count() const override { return 1; }
  Landmarks outline(double g, int m) const override {
    double a = std::sqrt(g), b = 1.0 / std::sqrt(g);
    int dense = 16 * m;
    std::vector<Point> poly(dense);
    for (int k = 0; k < dense; ++k) {
      double t = 2 * kPi * k / dense;
      poly[k] = {a * std::cos(t), b * std::sin(t)};
    }
    // positions along the dense polygon, then projected back onto the curve
    Landmarks l = resample_closed(poly, m);
    for (auto& p : l) {
      double t = std::atan2(p.y / b, p.x / a);
      p = {a * std::cos(t), b * std::sin(t)};
    }
    return l;
  }
};

// isosceles, height h along +x, base 2*pi/h, centroid at the origin
class TriangleTemplate final : public ShapeTemplate {
 public:
  TemplateKind kind() const override { return TemplateKind::Triangle; }
  int pure_param_count() const override { return 1; }
  Landmarks outline(double h, int m) const override {
    double half = kPi / h;
    std::vector<Point> poly = {{2 * h / 3, 0.0}, {-h / 3, half}, {-h / 3, -half}};
    return resample_closed(poly, m);
  }
};

class SquareTemplate final : public ShapeTemplate {
 public:
  TemplateKind kind() const override { return TemplateKind::Square; }
  int pure_param_count() const override { return 0; }
  Landmarks outline(double, int m) const override {
    double c = std::sqrt(kPi) / 2;
    // start at the midpoint of the right side
    std::vector<Point> poly = {{c, 0}, {c, c}, {-c, c}, {-c, -c}, {c, -c}};
    return resample_closed(poly, m);
  }
};

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

// proper crossings only; orientations within rounding of zero count as collinear
bool segments_cross(Point p1, Point p2, Point q1, Point q2) {
  double lp = std::hypot(p2.x - p1.x, p2.y - p1.y), lq = std::hypot(q2.x - q1.x, q2.y - q1.y);
  double span = std::max({std::abs(p1.x), std::abs(p1.y), std::abs(q1.x), std::abs(q1.y), lp, lq});
  double eps = 1e-12 * span * std::max(lp, lq);
  auto sgn = [eps](double d) { return d > eps ? 1 : (d < -eps ? -1 : 0); };
  int d1 = sgn(cross(q1, q2, p1)), d2 = sgn(cross(q1, q2, p2));
  int d3 = sgn(cross(p1, p2, q1)), d4 = sgn(cross(p1, p2, q2));
  return d1 * d2 < 0 && d3 * d4 < 0;
}

}  // namespace

const ShapeTemplate& shape_template(TemplateKind k) {
  static const CircleTemplate circle;
  static const EllipseTemplate ellipse;
  static const TriangleTemplate triangle;
  static const SquareTemplate square;
  switch (k) {
    case TemplateKind::Circle: return circle;
    case TemplateKind::Ellipse: return ellipse;
    case TemplateKind::Triangle: return triangle;
    case TemplateKind::Square: return square;
  }
  throw std::invalid_argument("unknown template");
}

const char* template_name(TemplateKind k) {
  static const char* names[] = {"circle", "ellipse", "triangle", "square"};
  return names[int(k)];
}

const char* template_code(TemplateKind k) {
  static const char* codes[] = {"C", "E", "TR", "S"};
  return codes[int(k)];
}

TemplateKind template_from_name(const std::string& s) {
  for (int i = 0; i < kTemplateCount; ++i) {
    auto k = TemplateKind(i);
    if (s == template_name(k) || s == template_code(k)) return k;
  }
  throw std::invalid_argument("unknown template: " + s);
}

double wrap_angle(double a) {
  if (a > -kPi && a <= kPi) return a;
  a = std::fmod(a + kPi, 2 * kPi);
  if (a <= 0) a += 2 * kPi;
  return a - kPi;
}

long long Raster::count() const {
  long long n = 0;
  for (const auto& s : spans) n += s.size();
  return n;
}

std::vector<std::array<int, 2>> Raster::pixels() const {
  std::vector<std::array<int, 2>> out;
  for (std::size_t r = 0; r < spans.size(); ++r)
    for (int x = spans[r].x0; x < spans[r].x1; ++x) out.push_back({x, y0 + int(r)});
  return out;
}

Landmarks unit_landmarks(const Template& t, double pure, int m) {
  if (m < 3) throw std::invalid_argument("need at least 3 landmarks");
  if (t.pure_param_count() > 0 && !(pure > t.bounds.lo && pure < t.bounds.hi))
    throw std::domain_error("pure parameter out of bounds");
  return unit_landmarks(t.kind, pure, m);
}

Landmarks unit_landmarks(TemplateKind k, double pure, int m) {
  if (m < 3) throw std::invalid_argument("need at least 3 landmarks");
  if (has_pure(k) && !(pure > 0)) throw std::domain_error("pure parameter must be positive");
  return shape_template(k).outline(pure, m);
}

Landmarks place(const Landmarks& unit, Point c, double s, double theta) {
  if (!(s > 0)) throw std::invalid_argument("scale must be positive");
  double cs = std::cos(theta) * s, sn = std::sin(theta) * s;
  Landmarks out(unit.size());
  for (std::size_t k = 0; k < unit.size(); ++k) {
    const Point& p = unit[k];
    out[k] = {c.x + cs * p.x - sn * p.y, c.y + sn * p.x + cs * p.y};
  }
  return out;
}

Landmarks landmarks(const ObjectParams& o, int m) {
  double th = has_rotation(o.kind) ? o.rotation : 0.0;
  return place(unit_landmarks(o.kind, o.pure, m), o.center, o.scale, th);
}

double signed_area(const Landmarks& l) {
  double a = 0;
  std::size_t n = l.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = l[i];
    const Point& q = l[(i + 1) % n];
    a += p.x * q.y - q.x * p.y;
  }
  return a / 2;
}

double perimeter(const Landmarks& l) {
  double p = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    const Point& a = l[i];
    const Point& b = l[(i + 1) % l.size()];
    p += std::hypot(b.x - a.x, b.y - a.y);
  }
  return p;
}

bool is_simple(const Landmarks& l) {
  std::size_t n = l.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap
      if (segments_cross(l[i], l[(i + 1) % n], l[j], l[(j + 1) % n])) return false;
    }
  return true;
}

double polygon_area(const Landmarks& l) {
  if (l.size() < 3) throw GeometryError("polygon needs at least 3 points");
  double a = std::abs(signed_area(l));
  if (!(a > 0)) throw GeometryError("degenerate polygon");
  if (!is_simple(l)) throw GeometryError("self-intersecting polygon");
  return a;
}

double aspect_ratio(const ObjectParams& obj) {
  Landmarks l = landmarks(obj);
  double a = std::abs(signed_area(l));
  if (!(a > 0)) throw GeometryError("zero area");
  return perimeter(l) / a;
}

// Convex outline: each row crosses the boundary twice. Edges going up in y
// bound the right side of a counter-clockwise polygon, edges going down the left.
Raster rasterize(const Landmarks& l, int width, int height) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("frame must be non-empty");
  Raster r;
  if (l.size() < 3) return r;
  double ymin = l[0].y, ymax = l[0].y;
  for (const auto& p : l) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  int j0 = int(std::floor(ymin)) + 1;
  int j1 = int(std::ceil(ymax)) - 1;
  j0 = std::max(j0, 0);
  j1 = std::min(j1, height - 1);
  if (j1 < j0) return r;
  bool ccw = signed_area(l) > 0;
  int rows = j1 - j0 + 1;
  std::vector<double> xl(rows, 1e300), xr(rows, -1e300);
  std::size_t n = l.size();
  for (std::size_t k = 0; k < n; ++k) {
    Point a = l[k], b = l[(k + 1) % n];
    if (a.y == b.y) continue;
    bool up = (b.y > a.y) == ccw;
    if (a.y > b.y) std::swap(a, b);
    int lo = std::max(int(std::ceil(a.y)), j0);
    int hi = std::min(int(std::floor(b.y)), j1);
    double slope = (b.x - a.x) / (b.y - a.y);
    for (int j = lo; j <= hi; ++j) {
      double x = a.x + (j - a.y) * slope;
      int idx = j - j0;
      if (up)
        xr[idx] = std::max(xr[idx], x);
      else
        xl[idx] = std::min(xl[idx], x);
    }
  }
  r.y0 = j0;
  r.spans.resize(rows);
  for (int idx = 0; idx < rows; ++idx) {
    if (!(xl[idx] < xr[idx])) continue;
    int x0 = int(std::floor(xl[idx])) + 1;
    int x1 = int(std::ceil(xr[idx]));  // exclusive
    x0 = std::max(x0, 0);
    x1 = std::min(x1, width);
    if (x1 > x0) r.spans[idx] = {x0, x1};
  }
  // trim empty rows at both ends
  std::size_t first = 0, last = r.spans.size();
  while (first < last && r.spans[first].size() == 0) ++first;
  while (last > first && r.spans[last - 1].size() == 0) --last;
  if (first == last) return Raster{};
  r.spans = std::vector<Span>(r.spans.begin() + first, r.spans.begin() + last);
  r.y0 += int(first);
  return r;
}

Raster rasterize(const ObjectParams& obj, int width, int height) {
  return rasterize(landmarks(obj), width, height);
}

long long overlap_count(const Raster& a, const Raster& b) {
  int lo = std::max(a.y0, b.y0);
  int hi = std::min(a.y0 + int(a.spans.size()), b.y0 + int(b.spans.size()));
  long long n = 0;
  for (int y = lo; y < hi; ++y) {
    const Span& sa = a.spans[y - a.y0];
    const Span& sb = b.spans[y - b.y0];
    int x0 = std::max(sa.x0, sb.x0), x1 = std::min(sa.x1, sb.x1);
    if (x1 > x0 && sa.size() && sb.size()) n += x1 - x0;
  }
  return n;
}

long long overlap_area(const ObjectParams& a, const ObjectParams& b, const Frame& f) {
  return overlap_count(rasterize(a, f), rasterize(b, f));
}

}  // namespace mppseg

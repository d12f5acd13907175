#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace mppseg {

constexpr int kLandmarks = 90;
constexpr double kPi = 3.14159265358979323846;

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TemplateKind : int { Circle = 0, Ellipse = 1, Triangle = 2, Square = 3 };
constexpr int kTemplateCount = 4;

const char* template_name(TemplateKind k);   // "circle", ...
const char* template_code(TemplateKind k);   // table code: C, E, TR, S
TemplateKind template_from_name(const std::string& s);

struct Point {
  double x = 0, y = 0;
  bool operator==(const Point&) const = default;
};

using Landmarks = std::vector<Point>;

struct PureBounds {
  double lo = 0, hi = 0;
  bool operator==(const PureBounds&) const = default;
};

// A pure object of area pi, optionally deformed by one random pure parameter.
class ShapeTemplate {
 public:
  virtual ~ShapeTemplate() = default;
  virtual TemplateKind kind() const = 0;
  virtual int pure_param_count() const = 0;
  virtual bool has_rotation() const { return true; }
  // boundary points, equally spaced by arc length, counter-clockwise
  virtual Landmarks outline(double pure, int m) const = 0;
};

const ShapeTemplate& shape_template(TemplateKind k);

struct Template {
  TemplateKind kind = TemplateKind::Circle;
  PureBounds bounds;  // ignored when pure_param_count() == 0
  int pure_param_count() const { return shape_template(kind).pure_param_count(); }
  static Template circle() { return {TemplateKind::Circle, {}}; }
  static Template ellipse(PureBounds b = {1.0, 3.0}) { return {TemplateKind::Ellipse, b}; }
  static Template triangle(PureBounds b = {1.5, 2.5}) { return {TemplateKind::Triangle, b}; }
  static Template square() { return {TemplateKind::Square, {}}; }
};

inline bool has_pure(TemplateKind k) { return k == TemplateKind::Ellipse || k == TemplateKind::Triangle; }
inline bool has_rotation(TemplateKind k) { return k != TemplateKind::Circle; }

struct ObjectParams {
  Point center;
  double scale = 1;
  double rotation = 0;  // (-pi, pi]; 0 for circles
  TemplateKind kind = TemplateKind::Circle;
  double pure = 0;      // g^r, unused for circle / square
  bool operator==(const ObjectParams&) const = default;
};

struct Configuration {
  std::vector<ObjectParams> objects;
  std::size_t m() const { return objects.size(); }
  bool operator==(const Configuration&) const = default;
};

struct Frame {
  int width = 0, height = 0;
  std::size_t pixels() const { return std::size_t(width) * std::size_t(height); }
  bool operator==(const Frame&) const = default;
};

// One horizontal run [x0, x1) per row, rows y0 .. y0 + spans.size() - 1.
struct Span {
  int x0 = 0, x1 = 0;
  int size() const { return x1 > x0 ? x1 - x0 : 0; }
};

struct Raster {
  int y0 = 0;
  std::vector<Span> spans;
  long long count() const;
  bool empty() const { return count() == 0; }
  bool contains(int x, int y) const {
    int r = y - y0;
    if (r < 0 || r >= int(spans.size())) return false;
    return x >= spans[r].x0 && x < spans[r].x1;
  }
  std::vector<std::array<int, 2>> pixels() const;  // (x, y), row-major
};

double wrap_angle(double a);  // into (-pi, pi]

// Landmarks of the pure object. Throws std::domain_error for out-of-bounds g^r,
// std::invalid_argument for m < 3.
Landmarks unit_landmarks(const Template& t, double pure, int m = kLandmarks);
// unchecked variant used on the hot path
Landmarks unit_landmarks(TemplateKind k, double pure, int m = kLandmarks);

Landmarks place(const Landmarks& unit, Point center, double scale, double rotation);
Landmarks landmarks(const ObjectParams& obj, int m = kLandmarks);

double signed_area(const Landmarks& l);
double perimeter(const Landmarks& l);
bool is_simple(const Landmarks& l);
// shoelace area; throws GeometryError for degenerate or self-intersecting input
double polygon_area(const Landmarks& l);
double aspect_ratio(const ObjectParams& obj);

// pixel (i, j) has its center at (i, j); strict interior only
Raster rasterize(const Landmarks& placed, int width, int height);
Raster rasterize(const ObjectParams& obj, int width, int height);
inline Raster rasterize(const ObjectParams& obj, const Frame& f) { return rasterize(obj, f.width, f.height); }

long long overlap_count(const Raster& a, const Raster& b);
long long overlap_area(const ObjectParams& a, const ObjectParams& b, const Frame& f);

}  // namespace mppseg

#include "mppseg/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mppseg/kernels.hpp"

namespace mppseg {

namespace {
std::vector<Raster> rasters_of(const Configuration& cfg, const Frame& f) {
  std::vector<Raster> rs;
  rs.reserve(cfg.m());
  for (const auto& o : cfg.objects) rs.push_back(rasterize(o, f));
  return rs;
}

void check_sizes(const Configuration& cfg, const IntensityParams& ints) {
  if (ints.mean.size() != cfg.m() + 1 || ints.variance.size() != cfg.m() + 1)
    throw std::invalid_argument("intensity vectors must have m + 1 entries");
}
}  // namespace

LabelMap build_label_map(const Configuration& cfg, const IntensityParams& ints, const Frame& f) {
  check_sizes(cfg, ints);
  LabelMap lm;
  lm.frame = f;
  kernels::omp::label_map(rasters_of(cfg, f), ints.mean, f, lm.owner, lm.cover);
  lm.mean.resize(f.pixels());
  lm.variance.resize(f.pixels());
  for (std::size_t p = 0; p < f.pixels(); ++p) {
    lm.mean[p] = ints.mean[lm.owner[p]];
    lm.variance[p] = ints.variance[lm.owner[p]];
  }
  return lm;
}

double log_likelihood(const Image& img, const LabelMap& lm) {
  double ll = 0;
  for (std::size_t p = 0; p < img.values.size(); ++p) {
    double d = img.values[p] - lm.mean[p];
    ll += -0.5 * std::log(2 * M_PI * lm.variance[p]) - d * d / (2 * lm.variance[p]);
  }
  return ll;
}

double log_likelihood(const Image& img, const Configuration& cfg, const IntensityParams& ints, const Frame& f) {
  check_sizes(cfg, ints);
  if (img.width != f.width || img.height != f.height) throw std::invalid_argument("image does not match frame");
  std::vector<int> owner, cover;
  kernels::omp::label_map(rasters_of(cfg, f), ints.mean, f, owner, cover);
  return kernels::omp::log_likelihood(img.values, owner, ints.mean, ints.variance, f.width);
}

double delta_log_likelihood(const Image& img, const Configuration& cfg, const IntensityParams& ints,
                            std::size_t changed, const ObjectParams& old) {
  Frame f = img.frame();
  Configuration before = cfg;
  before.objects.at(changed) = old;
  // only pixels in the union of the old and new footprints can change
  Raster a = rasterize(old, f), b = rasterize(cfg.objects[changed], f);
  LabelMap l0 = build_label_map(before, ints, f), l1 = build_label_map(cfg, ints, f);
  double d = 0;
  auto add_rows = [&](const Raster& r, const Raster* skip) {
    for (std::size_t row = 0; row < r.spans.size(); ++row) {
      int y = r.y0 + int(row);
      for (int x = r.spans[row].x0; x < r.spans[row].x1; ++x) {
        if (skip && skip->contains(x, y)) continue;
        std::size_t p = std::size_t(y) * f.width + x;
        double y0 = img.values[p] - l0.mean[p], y1 = img.values[p] - l1.mean[p];
        d += -0.5 * std::log(l1.variance[p] / l0.variance[p]) - y1 * y1 / (2 * l1.variance[p]) +
             y0 * y0 / (2 * l0.variance[p]);
      }
    }
  };
  add_rows(a, nullptr);
  add_rows(b, &a);
  return d;
}

std::vector<double> sample_image_real(const Configuration& cfg, const IntensityParams& ints, const Frame& f, Rng& rng) {
  check_sizes(cfg, ints);
  std::vector<int> owner, cover;
  kernels::omp::label_map(rasters_of(cfg, f), ints.mean, f, owner, cover);
  std::vector<double> out;
  kernels::omp::sample_pixels(owner, ints.mean, ints.variance, f, rng.bits(), out);
  return out;
}

Image sample_image(const Configuration& cfg, const IntensityParams& ints, const Frame& f, Rng& rng) {
  auto real = sample_image_real(cfg, ints, f, rng);
  Image img(f.width, f.height);
  for (std::size_t p = 0; p < real.size(); ++p) img.values[p] = std::clamp(int(std::lround(real[p])), 1, 256);
  return img;
}

double gaussian_block_loglik(long long n, long long s1, long long s2, double mu, double var) {
  if (n == 0) return 0.0;
  // n * s2 - s1^2 is exact in 128 bits
  __int128 num = (__int128)n * s2 - (__int128)s1 * s1;
  double mean = double(s1) / double(n);
  double q = double(num) / double(n) + double(n) * (mean - mu) * (mean - mu);
  return -0.5 * double(n) * std::log(2 * M_PI * var) - q / (2 * var);
}

}  // namespace mppseg

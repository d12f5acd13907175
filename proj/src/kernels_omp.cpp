#include <cmath>

#include "mppseg/kernels.hpp"
#include "mppseg/rng.hpp"

namespace mppseg::kernels::omp {

void label_map(const std::vector<Raster>& rasters, const std::vector<double>& means, const Frame& f,
               std::vector<int>& owner, std::vector<int>& cover) {
  owner.assign(f.pixels(), 0);
  cover.assign(f.pixels(), 0);
  const int n = int(rasters.size());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < f.height; ++y) {
    int* own = owner.data() + std::size_t(y) * f.width;
    int* cov = cover.data() + std::size_t(y) * f.width;
    for (int i = 0; i < n; ++i) {
      const Raster& r = rasters[i];
      int row = y - r.y0;
      if (row < 0 || row >= int(r.spans.size())) continue;
      int id = i + 1;
      for (int x = r.spans[row].x0; x < r.spans[row].x1; ++x) {
        if (cov[x] == 0 || means[id] < means[own[x]]) own[x] = id;
        ++cov[x];
      }
    }
  }
}

double log_likelihood(const std::vector<int>& values, const std::vector<int>& owner, const std::vector<double>& means,
                      const std::vector<double>& vars, int width) {
  const int rows = int(values.size() / std::size_t(width));
  std::vector<double> logv(vars.size());
  for (std::size_t k = 0; k < vars.size(); ++k) logv[k] = std::log(2 * M_PI * vars[k]);
  std::vector<double> partial(rows, 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < rows; ++y) {
    double acc = 0;
    std::size_t base = std::size_t(y) * width;
    for (int x = 0; x < width; ++x) {
      int o = owner[base + x];
      double d = values[base + x] - means[o];
      acc += -0.5 * logv[o] - d * d / (2 * vars[o]);
    }
    partial[y] = acc;
  }
  double ll = 0;
  for (double v : partial) ll += v;
  return ll;
}

void sample_pixels(const std::vector<int>& owner, const std::vector<double>& means, const std::vector<double>& vars,
                   const Frame& f, std::uint64_t seed, std::vector<double>& out) {
  out.resize(f.pixels());
#pragma omp parallel for schedule(static)
  for (int y = 0; y < f.height; ++y) {
    Rng rng = Rng::stream(seed, "pixel-row", std::uint64_t(y));
    for (int x = 0; x < f.width; ++x) {
      std::size_t p = std::size_t(y) * f.width + x;
      out[p] = means[owner[p]] + std::sqrt(vars[owner[p]]) * rng.normal();
    }
  }
}

}  // namespace mppseg::kernels::omp

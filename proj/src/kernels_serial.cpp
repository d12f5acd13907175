#include <cmath>

#include "mppseg/kernels.hpp"
#include "mppseg/rng.hpp"

namespace mppseg::kernels::serial {

void label_map(const std::vector<Raster>& rasters, const std::vector<double>& means, const Frame& f,
               std::vector<int>& owner, std::vector<int>& cover) {
  owner.assign(f.pixels(), 0);
  cover.assign(f.pixels(), 0);
  for (std::size_t i = 0; i < rasters.size(); ++i) {
    const Raster& r = rasters[i];
    int id = int(i) + 1;
    for (std::size_t row = 0; row < r.spans.size(); ++row) {
      std::size_t base = std::size_t(r.y0 + int(row)) * f.width;
      for (int x = r.spans[row].x0; x < r.spans[row].x1; ++x) {
        std::size_t p = base + x;
        // strict < keeps the lower index on ties
        if (cover[p] == 0 || means[id] < means[owner[p]]) owner[p] = id;
        ++cover[p];
      }
    }
  }
}

double log_likelihood(const std::vector<int>& values, const std::vector<int>& owner, const std::vector<double>& means,
                      const std::vector<double>& vars) {
  double ll = 0;
  for (std::size_t p = 0; p < values.size(); ++p) {
    double mu = means[owner[p]], v = vars[owner[p]];
    double d = values[p] - mu;
    ll += -0.5 * std::log(2 * M_PI * v) - d * d / (2 * v);
  }
  return ll;
}

void sample_pixels(const std::vector<int>& owner, const std::vector<double>& means, const std::vector<double>& vars,
                   const Frame& f, std::uint64_t seed, std::vector<double>& out) {
  out.resize(f.pixels());
  for (int y = 0; y < f.height; ++y) {
    Rng rng = Rng::stream(seed, "pixel-row", std::uint64_t(y));
    for (int x = 0; x < f.width; ++x) {
      std::size_t p = std::size_t(y) * f.width + x;
      out[p] = means[owner[p]] + std::sqrt(vars[owner[p]]) * rng.normal();
    }
  }
}

}  // namespace mppseg::kernels::serial

#pragma once

#include <cstdint>
#include <vector>

#include "mppseg/geometry.hpp"

namespace mppseg::kernels {

// Label-map and likelihood kernels. `serial` is the plain reference; `omp`
// splits rows over threads and reduces per-row partials in row order, so its
// output does not depend on the thread count.

namespace serial {
void label_map(const std::vector<Raster>& rasters, const std::vector<double>& means, const Frame& f,
               std::vector<int>& owner, std::vector<int>& cover);
double log_likelihood(const std::vector<int>& values, const std::vector<int>& owner, const std::vector<double>& means,
                      const std::vector<double>& vars);
void sample_pixels(const std::vector<int>& owner, const std::vector<double>& means, const std::vector<double>& vars,
                   const Frame& f, std::uint64_t seed, std::vector<double>& out);
}  // namespace serial

namespace omp {
void label_map(const std::vector<Raster>& rasters, const std::vector<double>& means, const Frame& f,
               std::vector<int>& owner, std::vector<int>& cover);
double log_likelihood(const std::vector<int>& values, const std::vector<int>& owner, const std::vector<double>& means,
                      const std::vector<double>& vars, int width);
void sample_pixels(const std::vector<int>& owner, const std::vector<double>& means, const std::vector<double>& vars,
                   const Frame& f, std::uint64_t seed, std::vector<double>& out);
}  // namespace omp

}  // namespace mppseg::kernels

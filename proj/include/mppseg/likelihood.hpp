#pragma once

#include <cstdint>
#include <vector>

#include "mppseg/geometry.hpp"
#include "mppseg/image.hpp"
#include "mppseg/prior.hpp"
#include "mppseg/rng.hpp"

namespace mppseg {

// owner 0 is the background, owner i + 1 is object i
struct LabelMap {
  Frame frame;
  std::vector<int> owner;
  std::vector<int> cover;
  std::vector<double> mean, variance;  // effective per-pixel parameters
};

LabelMap build_label_map(const Configuration& cfg, const IntensityParams& ints, const Frame& f);
double log_likelihood(const Image& img, const Configuration& cfg, const IntensityParams& ints, const Frame& f);
double log_likelihood(const Image& img, const LabelMap& lm);
// full recompute of the change when object i moves from `old` to its current value in cfg
double delta_log_likelihood(const Image& img, const Configuration& cfg, const IntensityParams& ints,
                            std::size_t changed, const ObjectParams& old);

// Gaussian draw per pixel; quantized to [1, 256]
Image sample_image(const Configuration& cfg, const IntensityParams& ints, const Frame& f, Rng& rng);
std::vector<double> sample_image_real(const Configuration& cfg, const IntensityParams& ints, const Frame& f, Rng& rng);

// log N(y; mu, var) summed over a block with sufficient statistics n, sum y, sum y^2
double gaussian_block_loglik(long long n, long long s1, long long s2, double mu, double var);

}  // namespace mppseg

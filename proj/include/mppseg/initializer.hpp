#pragma once

#include <cstdint>
#include <vector>

#include "mppseg/geometry.hpp"
#include "mppseg/image.hpp"
#include "mppseg/prior.hpp"
#include "mppseg/rng.hpp"

namespace mppseg {

struct Mask {
  int width = 0, height = 0;
  std::vector<std::uint8_t> on;
  Mask() = default;
  Mask(int w, int h) : width(w), height(h), on(std::size_t(w) * h, 0) {}
  bool at(int x, int y) const { return on[std::size_t(y) * width + x] != 0; }
  std::size_t count() const;
};

struct InitOptions {
  bool median_filter = true;
  int min_region_area = 12;
  double marker_persistence = 2.0;  // a marker's peak distance must exceed the level by this much
  bool operator==(const InitOptions&) const = default;
};

struct InitEstimate {
  std::size_t m0 = 0;
  Configuration cfg;
  IntensityParams ints;
};

int otsu_threshold(const Image& img);  // foreground: value <= threshold; -1 if none
Mask binarize(const Image& img, const InitOptions& opt = {});
std::vector<double> distance_transform(const Mask& m);  // Euclidean distance to the nearest off pixel
std::vector<Mask> connected_components(const Mask& m, int min_area = 1);
std::vector<Mask> decompose_regions(const Mask& m, const InitOptions& opt = {});
InitEstimate estimate_objects(const std::vector<Mask>& regions, const Image& img, const PriorConfig& prior, Rng& rng);

InitEstimate morphological_init(const Image& img, const PriorConfig& prior, Rng& rng, const InitOptions& opt = {});
// objects drawn from the interaction prior, intensities from the pixels they cover
InitEstimate random_init(const Image& img, const PriorConfig& prior, const InteractionParams& gamma, Rng& rng);

}  // namespace mppseg

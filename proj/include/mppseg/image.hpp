#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mppseg/geometry.hpp"

namespace mppseg {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model intensities in [1, 256]; files store value - 1.
struct Image {
  int width = 0, height = 0;
  std::vector<int> values;

  Image() = default;
  Image(int w, int h, int fill = 1) : width(w), height(h), values(std::size_t(w) * h, fill) {}
  Frame frame() const { return {width, height}; }
  int& at(int x, int y) { return values[std::size_t(y) * width + x]; }
  int at(int x, int y) const { return values[std::size_t(y) * width + x]; }
  bool operator==(const Image&) const = default;
};

Image read_image(const std::string& path);  // .pgm (P2/P5) or .png by extension
void write_image(const Image& img, const std::string& path);
Image read_pgm(const std::string& path);
void write_pgm(const Image& img, const std::string& path);
Image read_png(const std::string& path);
void write_png(const Image& img, const std::string& path);

}  // namespace mppseg

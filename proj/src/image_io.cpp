#include <png.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "mppseg/image.hpp"

namespace mppseg {

namespace {

bool ends_with(const std::string& s, const std::string& suf) {
  if (s.size() < suf.size()) return false;
  std::string tail = s.substr(s.size() - suf.size());
  std::transform(tail.begin(), tail.end(), tail.begin(), ::tolower);
  return tail == suf;
}

// next header token, skipping comments
std::string token(std::istream& in) {
  std::string t;
  while (in) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  in >> t;
  return t;
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic = token(in);
  if (magic != "P5" && magic != "P2") throw IoError("not a PGM file: " + path);
  int w = std::stoi(token(in)), h = std::stoi(token(in)), maxv = std::stoi(token(in));
  if (w <= 0 || h <= 0 || maxv <= 0 || maxv > 255) throw IoError("unsupported PGM header: " + path);
  Image img(w, h);
  if (magic == "P5") {
    in.get();
    std::vector<unsigned char> buf(img.values.size());
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (in.gcount() != std::streamsize(buf.size())) throw IoError("truncated PGM: " + path);
    for (std::size_t i = 0; i < buf.size(); ++i) img.values[i] = buf[i] + 1;
  } else {
    for (auto& v : img.values) {
      int x;
      if (!(in >> x)) throw IoError("truncated PGM: " + path);
      v = std::clamp(x, 0, 255) + 1;
    }
  }
  return img;
}

void write_pgm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> buf(img.values.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<unsigned char>(std::clamp(img.values[i], 1, 256) - 1);
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  if (!out) throw IoError("write failed: " + path);
}

Image read_png(const std::string& path) {
  png_image im{};
  im.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&im, path.c_str())) throw IoError("cannot read PNG " + path + ": " + im.message);
  im.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(im));
  if (!png_image_finish_read(&im, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&im);
    throw IoError("cannot decode PNG " + path);
  }
  Image img(int(im.width), int(im.height));
  for (std::size_t i = 0; i < img.values.size(); ++i) img.values[i] = buf[i] + 1;
  return img;
}

void write_png(const Image& img, const std::string& path) {
  png_image im{};
  im.version = PNG_IMAGE_VERSION;
  im.width = png_uint_32(img.width);
  im.height = png_uint_32(img.height);
  im.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(img.values.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<unsigned char>(std::clamp(img.values[i], 1, 256) - 1);
  if (!png_image_write_to_file(&im, path.c_str(), 0, buf.data(), 0, nullptr)) throw IoError("cannot write PNG " + path);
}

Image read_image(const std::string& path) {
  if (ends_with(path, ".png")) return read_png(path);
  return read_pgm(path);
}

void write_image(const Image& img, const std::string& path) {
  if (ends_with(path, ".png"))
    write_png(img, path);
  else
    write_pgm(img, path);
}

}  // namespace mppseg

#include "mppseg/rng.hpp"

#include <sstream>
#include <stdexcept>

namespace mppseg {

std::uint64_t hash_name(const std::string& s) {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Rng Rng::stream(std::uint64_t root, const std::string& name, std::uint64_t index) {
  std::uint64_t h = hash_name(name);
  std::seed_seq seq{std::uint32_t(root), std::uint32_t(root >> 32), std::uint32_t(h), std::uint32_t(h >> 32),
                    std::uint32_t(index), std::uint32_t(index >> 32)};
  Rng r;
  r.eng_.seed(seq);
  return r;
}

double Rng::beta(double a, double b) {
  double x = std::gamma_distribution<double>(a, 1.0)(eng_);
  double y = std::gamma_distribution<double>(b, 1.0)(eng_);
  return x / (x + y);
}

std::string Rng::state() const {
  std::ostringstream os;
  os << eng_;
  return os.str();
}

void Rng::set_state(const std::string& s) {
  std::istringstream is(s);
  is >> eng_;
  if (!is) throw std::invalid_argument("bad rng state");
}

}  // namespace mppseg

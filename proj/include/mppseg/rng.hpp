#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace mppseg {

// mt19937_64 with text-serializable state. Distributions are built per call so
// that the engine state alone determines the future stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1) : eng_(seed) {}
  // independent stream derived from (root, name)
  static Rng stream(std::uint64_t root, const std::string& name, std::uint64_t index = 0);

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng_); }
  double normal(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(eng_); }
  double beta(double a, double b);
  // uniform on {0, ..., n-1}
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_); }
  std::uint64_t bits() { return eng_(); }

  std::string state() const;
  void set_state(const std::string& s);
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

std::uint64_t hash_name(const std::string& s);

}  // namespace mppseg

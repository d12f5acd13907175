#pragma once

#include <cstdint>
#include <vector>

#include "mppseg/geometry.hpp"
#include "mppseg/image.hpp"
#include "mppseg/prior.hpp"

namespace mppseg {

// Incremental coverage / ownership tracker behind the sampler. Everything it
// holds is a pure function of (image, rasters, means): integer sufficient
// statistics per owner and integer overlap counters, so a state rebuilt from
// scratch is bit-identical to one reached by updates.
class PixelState {
 public:
  struct Stats {
    long long n = 0, s1 = 0, s2 = 0;
  };
  struct Change {
    std::size_t pix;
    int old_owner, new_owner, dcover;
  };
  struct Delta {
    int object = -1;  // object whose raster is replaced, or -1
    Raster raster;
    std::vector<Change> changes;
    std::vector<std::pair<int, Stats>> stats;  // owner -> increments
    long long d_multi = 0, d_pair = 0, d_triple = 0;
  };

  PixelState() = default;
  PixelState(const Image& img, const std::vector<Raster>& rasters, const std::vector<double>& means);

  std::size_t m() const { return rasters_.size(); }
  const Raster& raster(std::size_t i) const { return rasters_[i]; }
  const Stats& stats(int owner) const { return stats_[owner]; }
  long long multi() const { return multi_; }
  long long pair_sum() const { return pair_; }
  long long triple() const { return triple_; }
  CoverageStats coverage() const { return {multi_, pair_, triple_ > 0 ? 3 : (multi_ > 0 ? 2 : 0)}; }
  int owner_at(std::size_t p) const { return owner_[p]; }
  int cover_at(std::size_t p) const { return cover_[p]; }
  const Frame& frame() const { return frame_; }

  double log_likelihood(const IntensityParams& ints) const;
  // change in log-likelihood; owners in `extra` had their (mu, var) changed
  double delta_loglik(const Delta& d, const IntensityParams& before, const IntensityParams& after,
                      const std::vector<int>& extra = {}) const;

  // object i takes footprint r
  Delta propose_raster(std::size_t i, Raster r, const std::vector<double>& means) const;
  // object i's mean becomes new_mean (means holds the old value)
  Delta propose_mean(std::size_t i, double new_mean, const std::vector<double>& means) const;
  void commit(Delta&& d);

  // means_after includes the new component
  void append_object(Raster r, const std::vector<double>& means_after);
  // last object moves into slot i; means_after already reordered the same way
  void remove_object(std::size_t i, const std::vector<double>& means_after);

 private:
  int scan_owner(int x, int y, std::size_t skip_obj, const Raster* alt, const std::vector<double>& means,
                 std::size_t mean_obj, double mean_val) const;
  void add_stat(Delta& d, int owner, int y, int sign) const;
  void relabel(const std::vector<double>& means, std::size_t i);

  Frame frame_;
  const std::vector<int>* values_ = nullptr;
  std::vector<Raster> rasters_;
  std::vector<int> owner_, cover_;
  std::vector<Stats> stats_;
  long long multi_ = 0, pair_ = 0, triple_ = 0;
};

}  // namespace mppseg

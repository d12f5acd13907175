#include "mppseg/pixel_state.hpp"

#include <limits>

#include "mppseg/kernels.hpp"
#include "mppseg/likelihood.hpp"

namespace mppseg {

namespace {
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
long long pairs(int c) { return (long long)c * (c - 1) / 2; }
}  // namespace

PixelState::PixelState(const Image& img, const std::vector<Raster>& rasters, const std::vector<double>& means)
    : frame_(img.frame()), values_(&img.values), rasters_(rasters) {
  kernels::omp::label_map(rasters_, means, frame_, owner_, cover_);
  stats_.assign(rasters_.size() + 1, Stats{});
  for (std::size_t p = 0; p < owner_.size(); ++p) {
    long long y = img.values[p];
    Stats& s = stats_[owner_[p]];
    ++s.n;
    s.s1 += y;
    s.s2 += y * y;
    int c = cover_[p];
    if (c >= 2) ++multi_;
    if (c >= 3) ++triple_;
    pair_ += pairs(c);
  }
}

double PixelState::log_likelihood(const IntensityParams& ints) const {
  double ll = 0;
  for (std::size_t k = 0; k < stats_.size(); ++k)
    ll += gaussian_block_loglik(stats_[k].n, stats_[k].s1, stats_[k].s2, ints.mean[k], ints.variance[k]);
  return ll;
}

double PixelState::delta_loglik(const Delta& d, const IntensityParams& before, const IntensityParams& after,
                                const std::vector<int>& extra) const {
  std::vector<int> owners;
  for (const auto& [o, s] : d.stats) owners.push_back(o);
  for (int o : extra) {
    bool seen = false;
    for (int q : owners) seen = seen || q == o;
    if (!seen) owners.push_back(o);
  }
  double dl = 0;
  for (int o : owners) {
    Stats s = stats_[o], t = s;
    for (const auto& [q, inc] : d.stats)
      if (q == o) {
        t.n += inc.n;
        t.s1 += inc.s1;
        t.s2 += inc.s2;
      }
    dl += gaussian_block_loglik(t.n, t.s1, t.s2, after.mean[o], after.variance[o]) -
          gaussian_block_loglik(s.n, s.s1, s.s2, before.mean[o], before.variance[o]);
  }
  return dl;
}

int PixelState::scan_owner(int x, int y, std::size_t skip_obj, const Raster* alt, const std::vector<double>& means,
                           std::size_t mean_obj, double mean_val) const {
  int best = 0;
  double best_mu = 0;
  for (std::size_t j = 0; j < rasters_.size(); ++j) {
    bool in = j == skip_obj ? (alt && alt->contains(x, y)) : rasters_[j].contains(x, y);
    if (!in) continue;
    double mu = j == mean_obj ? mean_val : means[j + 1];
    if (best == 0 || mu < best_mu) {
      best = int(j) + 1;
      best_mu = mu;
    }
  }
  return best;
}

void PixelState::add_stat(Delta& d, int owner, int y, int sign) const {
  for (auto& [o, s] : d.stats)
    if (o == owner) {
      s.n += sign;
      s.s1 += sign * y;
      s.s2 += sign * (long long)y * y;
      return;
    }
  d.stats.push_back({owner, Stats{sign, (long long)sign * y, (long long)sign * y * y}});
}

PixelState::Delta PixelState::propose_raster(std::size_t i, Raster r, const std::vector<double>& means) const {
  Delta d;
  d.object = int(i);
  d.raster = std::move(r);
  const Raster& a = rasters_[i];
  const Raster& b = d.raster;
  const int id = int(i) + 1;
  const auto& vals = *values_;
  // only the symmetric difference of the two footprints changes
  auto visit = [&](const Raster& from, const Raster& other, int dcover) {
    for (std::size_t row = 0; row < from.spans.size(); ++row) {
      int y = from.y0 + int(row);
      for (int x = from.spans[row].x0; x < from.spans[row].x1; ++x) {
        if (other.contains(x, y)) continue;
        std::size_t p = std::size_t(y) * frame_.width + x;
        int oc = cover_[p], nc = oc + dcover;
        int oo = owner_[p], no;
        if (nc == 0)
          no = 0;
        else if (nc == 1 && dcover > 0)
          no = id;
        else if (nc == 1 && oo != id)
          no = oo;
        else
          no = scan_owner(x, y, i, &b, means, kNone, 0.0);
        d.changes.push_back({p, oo, no, dcover});
        if (no != oo) {
          add_stat(d, oo, vals[p], -1);
          add_stat(d, no, vals[p], +1);
        }
        d.d_multi += (nc >= 2) - (oc >= 2);
        d.d_triple += (nc >= 3) - (oc >= 3);
        d.d_pair += pairs(nc) - pairs(oc);
      }
    }
  };
  visit(a, b, -1);
  visit(b, a, +1);
  return d;
}

PixelState::Delta PixelState::propose_mean(std::size_t i, double new_mean, const std::vector<double>& means) const {
  Delta d;
  const Raster& r = rasters_[i];
  const auto& vals = *values_;
  for (std::size_t row = 0; row < r.spans.size(); ++row) {
    int y = r.y0 + int(row);
    for (int x = r.spans[row].x0; x < r.spans[row].x1; ++x) {
      std::size_t p = std::size_t(y) * frame_.width + x;
      if (cover_[p] < 2) continue;
      int oo = owner_[p];
      int no = scan_owner(x, y, kNone, nullptr, means, i, new_mean);
      if (no == oo) continue;
      d.changes.push_back({p, oo, no, 0});
      add_stat(d, oo, vals[p], -1);
      add_stat(d, no, vals[p], +1);
    }
  }
  return d;
}

void PixelState::commit(Delta&& d) {
  for (const auto& c : d.changes) {
    cover_[c.pix] += c.dcover;
    owner_[c.pix] = c.new_owner;
  }
  for (const auto& [o, s] : d.stats) {
    stats_[o].n += s.n;
    stats_[o].s1 += s.s1;
    stats_[o].s2 += s.s2;
  }
  multi_ += d.d_multi;
  pair_ += d.d_pair;
  triple_ += d.d_triple;
  if (d.object >= 0) rasters_[d.object] = std::move(d.raster);
}

void PixelState::append_object(Raster r, const std::vector<double>& means_after) {
  rasters_.emplace_back();
  stats_.emplace_back();
  commit(propose_raster(rasters_.size() - 1, std::move(r), means_after));
}

// owners of the multi-covered pixels of object i, recomputed under `means`
void PixelState::relabel(const std::vector<double>& means, std::size_t i) {
  Delta d;
  const Raster& r = rasters_[i];
  const auto& vals = *values_;
  for (std::size_t row = 0; row < r.spans.size(); ++row) {
    int y = r.y0 + int(row);
    for (int x = r.spans[row].x0; x < r.spans[row].x1; ++x) {
      std::size_t p = std::size_t(y) * frame_.width + x;
      if (cover_[p] < 2) continue;
      int oo = owner_[p], no = scan_owner(x, y, kNone, nullptr, means, kNone, 0.0);
      if (no == oo) continue;
      d.changes.push_back({p, oo, no, 0});
      add_stat(d, oo, vals[p], -1);
      add_stat(d, no, vals[p], +1);
    }
  }
  commit(std::move(d));
}

void PixelState::remove_object(std::size_t i, const std::vector<double>& means_after) {
  std::size_t last = rasters_.size() - 1;
  // vacate slot i under the old ordering: means_after moved last into i,
  // so rebuild the pre-removal vector for the ownership scan
  std::vector<double> before(means_after);
  before.push_back(0.0);
  if (i != last) before[last + 1] = means_after[i + 1];
  commit(propose_raster(i, Raster{}, before));
  if (i != last) {
    const Raster& r = rasters_[last];
    for (std::size_t row = 0; row < r.spans.size(); ++row) {
      std::size_t base = std::size_t(r.y0 + int(row)) * frame_.width;
      for (int x = r.spans[row].x0; x < r.spans[row].x1; ++x)
        if (owner_[base + x] == int(last) + 1) owner_[base + x] = int(i) + 1;
    }
    rasters_[i] = std::move(rasters_[last]);
    stats_[i + 1] = stats_[last + 1];
  }
  rasters_.pop_back();
  stats_.pop_back();
  if (i != last) relabel(means_after, i);
}

}  // namespace mppseg

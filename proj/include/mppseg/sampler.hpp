#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mppseg/aipp_chain.hpp"
#include "mppseg/geometry.hpp"
#include "mppseg/image.hpp"
#include "mppseg/pixel_state.hpp"
#include "mppseg/prior.hpp"
#include "mppseg/rng.hpp"

namespace mppseg {

struct MoveProbabilities {
  double birth = 0.10, death = 0.10, split = 0.05, merge = 0.05;
  bool operator==(const MoveProbabilities&) const = default;
};

struct StepSizes {
  double center = 0.3, scale = 0.2, rotation = 0.03, pure = 0.03;
  double mean = 1.0, log_variance = 0.1, log_gamma = 0.15;
  bool operator==(const StepSizes&) const = default;
};

struct SamplerConfig {
  MoveProbabilities moves;
  StepSizes steps;
  int mcmh_aux_count = 20;
  int aux_spacing = 10;  // prior-chain steps between auxiliary draws
  bool mcmh = true;
  long long iterations = 1000, burn_in = 0, thinning = 1;
  std::uint64_t seed = 1;
  double neighbor_distance_factor = 1.2;
  bool gamma1_random = true, gamma2_random = true;
  bool swap = true;
  bool update_marks = true;
  bool update_intensities = true;  // false: every (mu, var) stays fixed
  double fixed_mean = 0, fixed_variance = 1;  // given to newborn objects when intensities are fixed
  std::size_t m_max = 200;
  long long checkpoint_every = 0;
  void validate() const;
  bool operator==(const SamplerConfig&) const = default;
};

struct ChainState {
  Configuration cfg;
  IntensityParams ints;
  InteractionParams gamma;
  std::uint64_t iteration = 0;
  bool operator==(const ChainState&) const = default;
};

enum class MoveKind : int { Center, Scale, Rotation, Pure, Mean, Variance, Swap, Birth, Death, Split, Merge, Gamma, Exchange };
constexpr int kMoveKinds = 13;
const char* move_name(MoveKind k);

struct MoveRecord {
  MoveKind kind;
  double log_ratio = 0;
  bool accepted = false;
  std::size_t m_after = 0;
};

struct MoveStats {
  std::array<long long, kMoveKinds> proposed{}, accepted{};
  void add(const MoveRecord& r) {
    ++proposed[int(r.kind)];
    accepted[int(r.kind)] += r.accepted;
  }
};

// Auxiliary variables of a split (u1, u2, u3, then the new child's marks and intensity).
struct SplitAux {
  double u1 = 0, u2 = 0, u3 = 0;
  double rotation = 0;  // u4
  TemplateKind kind = TemplateKind::Circle;  // u5
  double pure = 0;      // u6
  double mean = 0, variance = 1;
};

struct SplitResult {
  ObjectParams a, b;
};
// h -> (a, b); a keeps h's rotation, template and pure parameter
SplitResult split_transform(const ObjectParams& h, const SplitAux& u);
// inverse: (a, b) -> (h, u1, u2, u3); a is the marks parent
std::pair<ObjectParams, SplitAux> merge_transform(const ObjectParams& a, const ObjectParams& b);
double split_log_jacobian(double s_h, double u1, double u3);

// Data-driven proposal for a component's (mu, var) given the pixels under a footprint.
struct IntensityProposal {
  double mean_center, mean_sd, logvar_center, logvar_sd;
  static IntensityProposal from_pixels(const Image& img, const Raster& r);
  double log_density(double mu, double var) const;
  std::pair<double, double> draw(Rng& rng) const;
};

class Sampler {
 public:
  Sampler(const Image& img, const PriorConfig& prior, const SamplerConfig& cfg, ChainState init);

  const ChainState& state() const { return st_; }
  const PixelState& pixels() const { return px_; }
  // log pseudo-posterior: likelihood + interaction + marks + intensities + gamma prior
  double log_posterior() const;
  double log_posterior_of(const ChainState& s) const;  // fresh evaluation

  void sweep(Rng& rng, MoveStats* stats = nullptr);  // marks and intensities
  MoveRecord swap_move(std::size_t j, Rng& rng);
  MoveRecord birth_move(Rng& rng);
  MoveRecord death_move(Rng& rng);
  MoveRecord split_move(Rng& rng);
  MoveRecord merge_move(Rng& rng);
  MoveRecord update_gamma(Rng& rng, AippChain* aux, Rng* aux_rng, MoveStats* stats = nullptr);
  // one full iteration
  void iterate(Rng& rng, AippChain* aux, Rng& aux_rng, MoveStats* stats = nullptr);

  // acceptance ratios on explicit proposals (no randomness)
  double log_birth_ratio(const ObjectParams& o, double mu, double var) const;
  double log_death_ratio(std::size_t j) const;
  double log_split_ratio(std::size_t h, const SplitAux& u) const;
  double log_merge_ratio(std::size_t ia, std::size_t ib) const;
  double log_swap_ratio(std::size_t j, const ObjectParams& proposed) const;
  std::vector<std::pair<std::size_t, std::size_t>> merge_pairs() const;

  // exchange correction: log of the estimated Z(g')/Z(g) from draws at g
  static double log_partition_ratio(const std::vector<std::pair<std::size_t, CoverageStats>>& draws,
                                    const InteractionParams& from, const InteractionParams& to, const PriorConfig& p);

  void apply_birth(const ObjectParams& o, double mu, double var);
  void apply_death(std::size_t j);

 private:
  struct Proposal {
    ChainState st;
    PixelState px;
  };
  double log_marks_prior(const Configuration& c) const;
  double log_ints_prior(const IntensityParams& ints) const;
  double log_gamma_term(const InteractionParams& g) const;
  double log_post(const ChainState& s, const PixelState& px) const;
  bool visible(const Raster& r) const { return !prior_.require_visible || !r.empty(); }
  bool accept(double log_ratio, Rng& rng) const;
  MoveRecord geometry_step(std::size_t i, const ObjectParams& proposed, MoveKind kind, double log_q, Rng& rng);
  Proposal with_split(std::size_t h, const SplitAux& u) const;
  Proposal with_merge(std::size_t ia, std::size_t ib) const;
  double log_aux_density(const SplitAux& u) const;
  std::size_t count_pairs_with(const Configuration& c, std::size_t ia, std::size_t ib) const;

  const Image* img_;
  PriorConfig prior_;
  SamplerConfig cfg_;
  Frame frame_;
  ChainState st_;
  PixelState px_;
  double log_w_;
};

// ----- chain driver -----

struct PosteriorSample {
  std::uint64_t iteration = 0;
  InteractionParams gamma;
  double log_post = 0;
  Configuration cfg;
  IntensityParams ints;
  bool operator==(const PosteriorSample&) const = default;
};

struct Checkpoint {
  ChainState state;
  std::string chain_rng, aux_rng;
  Configuration aux_config;
};

struct ChainSinks {
  std::function<void(const PosteriorSample&)> on_sample;
  std::function<void(const Checkpoint&)> on_checkpoint;
};

struct ChainSummary {
  ChainState final_state;
  MoveStats stats;
  std::size_t samples = 0;
};

ChainSummary run_chain(const Image& img, const PriorConfig& prior, const SamplerConfig& cfg, const ChainState& init,
                       const ChainSinks& sinks, const Checkpoint* resume = nullptr);

}  // namespace mppseg

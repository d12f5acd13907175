#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mppseg/initializer.hpp"
#include "mppseg/prior.hpp"
#include "mppseg/sampler.hpp"
#include "mppseg/simulator.hpp"

namespace mppseg {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void to_json(json& j, const Point& p);
void from_json(const json& j, Point& p);
void to_json(json& j, const ObjectParams& o);
void from_json(const json& j, ObjectParams& o);
void to_json(json& j, const Configuration& c);
void from_json(const json& j, Configuration& c);
void to_json(json& j, const IntensityParams& v);
void from_json(const json& j, IntensityParams& v);
void to_json(json& j, const InteractionParams& g);
void from_json(const json& j, InteractionParams& g);
void to_json(json& j, const Frame& f);
void from_json(const json& j, Frame& f);
void to_json(json& j, const BetaPrior& b);
void from_json(const json& j, BetaPrior& b);
void to_json(json& j, const LogNormalPrior& l);
void from_json(const json& j, LogNormalPrior& l);
void to_json(json& j, const IntensitySupport& s);
void from_json(const json& j, IntensitySupport& s);
void to_json(json& j, const MarkLattice& l);
void from_json(const json& j, MarkLattice& l);
void to_json(json& j, const PriorConfig& p);
void from_json(const json& j, PriorConfig& p);
void to_json(json& j, const MoveProbabilities& m);
void from_json(const json& j, MoveProbabilities& m);
void to_json(json& j, const StepSizes& s);
void from_json(const json& j, StepSizes& s);
void to_json(json& j, const SamplerConfig& c);  // seed is left to the caller
void from_json(const json& j, SamplerConfig& c);
void to_json(json& j, const SimulationConfig& c);
void from_json(const json& j, SimulationConfig& c);
void to_json(json& j, const InitOptions& o);
void from_json(const json& j, InitOptions& o);
void to_json(json& j, const ChainState& s);
void from_json(const json& j, ChainState& s);
void to_json(json& j, const GroundTruth& g);
void from_json(const json& j, GroundTruth& g);
void to_json(json& j, const Checkpoint& c);
void from_json(const json& j, Checkpoint& c);

json read_json(const std::string& path);  // IoError if unreadable, ConfigError if malformed
void write_json(const json& j, const std::string& path);  // atomic replace

// ----- sample files -----
// one header line, then one row per sample:
// iteration,m,gamma1,gamma2,log_post,mu0,var0 followed by
// template,x,y,s,theta,g,mu,var for every object
std::string sample_header();
std::string format_sample(const PosteriorSample& s);
PosteriorSample parse_sample(const std::string& line);
void write_samples(const std::vector<PosteriorSample>& v, const std::string& path);
std::vector<PosteriorSample> read_samples(const std::string& path);

// ----- run configuration -----

enum class InitMethod { Morphological, Random };

struct IoPaths {
  std::string image;
  std::string out_dir = "out";
  std::string image_format = "png";  // format written by simulate / analyze
  bool operator==(const IoPaths&) const = default;
};

struct ReportConfig {
  int bins = 0;  // 0: Freedman-Diaconis
  bool operator==(const ReportConfig&) const = default;
};

struct StudyConfig {
  int replicates = 1;
  double gamma2_fixed = -1;  // value for the "fixed at truth" arm; negative: the simulated gamma2
  bool operator==(const StudyConfig&) const = default;
};

struct RunConfig {
  static constexpr int kSchemaVersion = 1;
  int schema_version = kSchemaVersion;
  PriorConfig prior = default_fit_prior();
  SamplerConfig sampler;  // sampler.seed is the root seed
  SimulationConfig simulation;
  InitMethod init = InitMethod::Morphological;
  InitOptions init_options;
  std::optional<InteractionParams> initial_gamma;  // unset: prior medians
  ReportConfig report;
  StudyConfig study;
  IoPaths io;

  InteractionParams start_gamma() const;
  void validate() const;  // throws ConfigError
  bool operator==(const RunConfig&) const = default;

  static PriorConfig default_fit_prior();
};

void to_json(json& j, const RunConfig& c);
void from_json(const json& j, RunConfig& c);
RunConfig parse_run_config(const json& j);  // strict: unknown keys and bad schema_version rejected
RunConfig load_run_config(const std::string& path);

}  // namespace mppseg

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mppseg/image.hpp"
#include "mppseg/report.hpp"
#include "mppseg/sampler.hpp"
#include "mppseg/serialize.hpp"

namespace mppseg {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitIo = 3, kExitRuntime = 4 };

constexpr const char* kOutDirEnv = "MPPSEG_OUT_DIR";
// flag beats environment beats config file
std::string resolve_out_dir(const std::optional<std::string>& flag, const RunConfig& cfg);

// simulate: image.<fmt> and truth.json
GroundTruth cmd_simulate(const RunConfig& cfg, const std::string& out_dir);

struct FitResult {
  ChainState init;
  ChainSummary summary;
  std::vector<PosteriorSample> samples;  // only those produced by this call
};
// initial state from the configured initializer (stream "init")
ChainState initial_state(const Image& img, const RunConfig& cfg);
// out_dir empty: nothing written. resume: path of a checkpoint written by an earlier call
FitResult fit_image(const Image& img, const RunConfig& cfg, const std::string& out_dir,
                    const std::string& resume = {});
FitResult cmd_fit(const RunConfig& cfg, const std::string& image, const std::string& out_dir,
                  const std::string& resume = {});

// all four histograms unless `only` is given
void cmd_analyze(const RunConfig& cfg, const std::string& samples, const std::string& image, const std::string& out_dir,
                 std::optional<HistField> only = std::nullopt);

struct ArmSummary {
  std::string arm;
  int replicate = 0;
  std::size_t m_true = 0;
  double gamma2_true = 0;
  std::size_t samples = 0;
  double p_true_m = 0, p_more = 0, mean_m = 0;
  double gamma2_median = 0, gamma2_q05 = 0, gamma2_q95 = 0;
  std::vector<double> m_distribution;  // index m
};
// posterior summaries of one fit against a known object count
ArmSummary summarize_arm(const std::vector<PosteriorSample>& samples, std::size_t m_true);
std::vector<ArmSummary> cmd_study(const RunConfig& cfg, const std::string& out_dir);

int run_cli(int argc, char** argv);

}  // namespace mppseg

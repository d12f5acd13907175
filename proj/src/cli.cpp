#include "mppseg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "mppseg/initializer.hpp"
#include "mppseg/simulator.hpp"

namespace fs = std::filesystem;

namespace mppseg {

namespace {

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  double pos = q * double(v.size() - 1);
  std::size_t lo = std::size_t(std::floor(pos)), hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

json move_table(const MoveStats& st) {
  json j = json::object();
  for (int k = 0; k < kMoveKinds; ++k)
    if (st.proposed[k] > 0)
      j[move_name(MoveKind(k))] = {{"proposed", st.proposed[k]}, {"accepted", st.accepted[k]}};
  return j;
}

// keep samples up to and including `iteration`
void truncate_samples(const std::string& path, std::uint64_t iteration) {
  std::vector<PosteriorSample> kept;
  if (fs::exists(path))
    for (auto& s : read_samples(path))
      if (s.iteration <= iteration) kept.push_back(std::move(s));
  write_samples(kept, path);
}

}  // namespace

std::string resolve_out_dir(const std::optional<std::string>& flag, const RunConfig& cfg) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return cfg.io.out_dir;
}

GroundTruth cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  std::uint64_t seed = cfg.sampler.seed;
  GroundTruth gt = simulate(cfg.simulation, cfg.prior, seed);
  Rng rng = Rng::stream(seed, "render");
  Image img = render(gt, rng);
  std::string image = join(out_dir, "image." + cfg.io.image_format);
  write_image(img, image);
  write_json(json(gt), join(out_dir, "truth.json"));
  write_json(json(cfg), join(out_dir, "config.json"));
  write_json({{"command", "simulate"},
              {"seed", seed},
              {"image", image},
              {"truth", join(out_dir, "truth.json")},
              {"config", join(out_dir, "config.json")},
              {"objects", gt.cfg.m()}},
             join(out_dir, "manifest.json"));
  return gt;
}

ChainState initial_state(const Image& img, const RunConfig& cfg) {
  Rng rng = Rng::stream(cfg.sampler.seed, "init");
  InitEstimate est = cfg.init == InitMethod::Random ? random_init(img, cfg.prior, cfg.start_gamma(), rng)
                                                    : morphological_init(img, cfg.prior, rng, cfg.init_options);
  ChainState st;
  st.cfg = est.cfg;
  st.ints = est.ints;
  while (st.cfg.m() > cfg.sampler.m_max) {
    st.cfg.objects.pop_back();
    st.ints.mean.pop_back();
    st.ints.variance.pop_back();
  }
  if (!cfg.sampler.update_intensities)
    for (std::size_t i = 1; i < st.ints.size(); ++i) {
      st.ints.mean[i] = cfg.sampler.fixed_mean;
      st.ints.variance[i] = cfg.sampler.fixed_variance;
    }
  st.gamma = cfg.start_gamma();
  return st;
}

FitResult fit_image(const Image& img, const RunConfig& cfg, const std::string& out_dir, const std::string& resume) {
  FitResult res;
  bool files = !out_dir.empty();
  std::optional<Checkpoint> ck;
  if (!resume.empty()) ck = read_json(resume).get<Checkpoint>();
  res.init = ck ? ck->state : initial_state(img, cfg);

  std::string samples_path, ck_path;
  std::ofstream samples_out;
  if (files) {
    ensure_dir(out_dir);
    samples_path = join(out_dir, "samples.csv");
    ck_path = join(out_dir, "checkpoint.json");
    write_json(json(cfg), join(out_dir, "config.json"));
    if (ck) {
      truncate_samples(samples_path, ck->state.iteration);
    } else {
      write_json(json(res.init), join(out_dir, "init.json"));
      write_samples({}, samples_path);
    }
    samples_out.open(samples_path, std::ios::binary | std::ios::app);
    if (!samples_out) throw IoError("cannot write " + samples_path);
  }

  ChainSinks sinks;
  sinks.on_sample = [&](const PosteriorSample& s) {
    res.samples.push_back(s);
    if (files) samples_out << format_sample(s) << '\n';
  };
  if (files)
    sinks.on_checkpoint = [&](const Checkpoint& c) {
      samples_out.flush();
      if (!samples_out) throw IoError("cannot write " + samples_path);
      write_json(json(c), ck_path);
    };
  res.summary = run_chain(img, cfg.prior, cfg.sampler, res.init, sinks, ck ? &*ck : nullptr);

  if (files) {
    samples_out.close();
    if (!samples_out) throw IoError("cannot write " + samples_path);
    write_json({{"command", "fit"},
                {"seed", cfg.sampler.seed},
                {"config", join(out_dir, "config.json")},
                {"image", cfg.io.image},
                {"resumed_from", resume},
                {"samples", samples_path},
                {"checkpoint", ck_path},
                {"init", join(out_dir, "init.json")},
                {"iterations", res.summary.final_state.iteration},
                {"samples_this_run", res.summary.samples},
                {"final_m", res.summary.final_state.cfg.m()},
                {"moves", move_table(res.summary.stats)}},
               join(out_dir, "manifest.json"));
  }
  return res;
}

FitResult cmd_fit(const RunConfig& cfg, const std::string& image, const std::string& out_dir,
                  const std::string& resume) {
  Image img = read_image(image);
  RunConfig c = cfg;
  c.io.image = image;
  return fit_image(img, c, out_dir, resume);
}

void cmd_analyze(const RunConfig& cfg, const std::string& samples_path, const std::string& image,
                 const std::string& out_dir, std::optional<HistField> only) {
  auto samples = read_samples(samples_path);
  if (samples.empty()) throw std::runtime_error(samples_path + " holds no samples");
  Image img = read_image(image);
  ensure_dir(out_dir);
  const PosteriorSample& map = map_estimate(samples);
  json outputs = json::object();
  std::vector<HistField> fields{HistField::Scale, HistField::Mean, HistField::Pure, HistField::Template};
  if (only) fields = {*only};
  for (auto f : fields) {
    std::string p = join(out_dir, std::string("hist_") + hist_field_name(f) + ".csv");
    write_text(p, histogram_table(histogram(map, f, cfg.report.bins)));
    outputs[std::string("hist_") + hist_field_name(f)] = p;
  }
  if (!only) {
    auto objs = classification_probabilities(samples, map, img.frame());
    write_text(join(out_dir, "summary.csv"), summary_table(objs));
    write_text(join(out_dir, "classification.csv"), classification_table(objs));
    std::string overlay = join(out_dir, "overlay." + cfg.io.image_format);
    write_image(render_overlay(img, map.cfg), overlay);
    ChainState st{map.cfg, map.ints, map.gamma, map.iteration};
    write_json({{"state", st}, {"log_post", map.log_post}}, join(out_dir, "map.json"));
    auto arm = summarize_arm(samples, map.cfg.m());
    std::string mp = "m,probability\n";
    for (std::size_t m = 0; m < arm.m_distribution.size(); ++m)
      if (arm.m_distribution[m] > 0) mp += std::to_string(m) + "," + std::to_string(arm.m_distribution[m]) + "\n";
    write_text(join(out_dir, "m_posterior.csv"), mp);
    outputs["summary"] = join(out_dir, "summary.csv");
    outputs["classification"] = join(out_dir, "classification.csv");
    outputs["overlay"] = overlay;
    outputs["map"] = join(out_dir, "map.json");
    outputs["m_posterior"] = join(out_dir, "m_posterior.csv");
  }
  write_json({{"command", "analyze"},
              {"samples", samples_path},
              {"image", image},
              {"sample_count", samples.size()},
              {"map_iteration", map.iteration},
              {"map_m", map.cfg.m()},
              {"outputs", outputs}},
             join(out_dir, "manifest.json"));
}

ArmSummary summarize_arm(const std::vector<PosteriorSample>& samples, std::size_t m_true) {
  ArmSummary a;
  a.m_true = m_true;
  a.samples = samples.size();
  if (samples.empty()) return a;
  std::vector<double> g2;
  double n = double(samples.size());
  for (const auto& s : samples) {
    std::size_t m = s.cfg.m();
    if (a.m_distribution.size() <= m) a.m_distribution.resize(m + 1, 0.0);
    a.m_distribution[m] += 1 / n;
    a.p_true_m += (m == m_true) / n;
    a.p_more += (m > m_true) / n;
    a.mean_m += double(m) / n;
    g2.push_back(s.gamma.gamma2);
  }
  a.gamma2_median = quantile(g2, 0.5);
  a.gamma2_q05 = quantile(g2, 0.05);
  a.gamma2_q95 = quantile(g2, 0.95);
  return a;
}

std::vector<ArmSummary> cmd_study(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  const int reps = cfg.study.replicates;
  const char* arms[] = {"gamma_random", "gamma2_zero", "gamma2_fixed"};
  std::vector<GroundTruth> truth(reps);
  std::vector<Image> images(reps);
  for (int r = 0; r < reps; ++r) {
    RunConfig c = cfg;
    c.sampler.seed = Rng::stream(cfg.sampler.seed, "study", std::uint64_t(r)).bits();
    truth[r] = cmd_simulate(c, join(out_dir, "rep_" + std::to_string(r)));
    images[r] = read_image(join(out_dir, "rep_" + std::to_string(r) + "/image." + cfg.io.image_format));
  }
  std::vector<ArmSummary> out(std::size_t(reps) * 3);
  std::vector<std::string> errors(out.size());
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < int(out.size()); ++t) {
    int r = t / 3, a = t % 3;
    try {
      RunConfig c = cfg;
      c.sampler.seed = Rng::stream(cfg.sampler.seed, "study", std::uint64_t(r)).bits();
      InteractionParams g0 = cfg.start_gamma();
      if (a == 0) {
        c.sampler.gamma1_random = c.sampler.gamma2_random = true;
      } else {
        c.sampler.gamma1_random = true;
        c.sampler.gamma2_random = false;
        g0.gamma2 = a == 1 ? 0.0 : (cfg.study.gamma2_fixed >= 0 ? cfg.study.gamma2_fixed : truth[r].gamma.gamma2);
      }
      c.initial_gamma = g0;
      std::string dir = join(out_dir, "rep_" + std::to_string(r) + "/" + arms[a]);
      auto fit = fit_image(images[r], c, dir);
      ArmSummary s = summarize_arm(fit.samples, truth[r].cfg.m());
      s.arm = arms[a];
      s.replicate = r;
      s.gamma2_true = truth[r].gamma.gamma2;
      out[t] = s;
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error("study replicate failed: " + e);

  std::string table = "replicate,arm,m_true,samples,p_m_true,p_m_above,mean_m,gamma2_true,gamma2_median,gamma2_q05,gamma2_q95\n";
  char buf[256];
  for (const auto& s : out) {
    std::snprintf(buf, sizeof buf, "%d,%s,%zu,%zu,%.4f,%.4f,%.3f,%g,%.4g,%.4g,%.4g\n", s.replicate, s.arm.c_str(),
                  s.m_true, s.samples, s.p_true_m, s.p_more, s.mean_m, s.gamma2_true, s.gamma2_median, s.gamma2_q05,
                  s.gamma2_q95);
    table += buf;
  }
  write_text(join(out_dir, "study.csv"), table);

  // m posterior pooled over replicates, per arm
  std::map<std::pair<std::string, std::size_t>, double> pooled;
  for (const auto& s : out)
    for (std::size_t m = 0; m < s.m_distribution.size(); ++m)
      if (s.m_distribution[m] > 0) pooled[{s.arm, m}] += s.m_distribution[m] / reps;
  std::string mp = "arm,m,probability\n";
  for (const auto& [k, p] : pooled) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%.4f\n", k.first.c_str(), k.second, p);
    mp += buf;
  }
  write_text(join(out_dir, "m_posterior.csv"), mp);
  write_json({{"command", "study"},
              {"seed", cfg.sampler.seed},
              {"replicates", reps},
              {"study", join(out_dir, "study.csv")},
              {"m_posterior", join(out_dir, "m_posterior.csv")}},
             join(out_dir, "manifest.json"));
  return out;
}

// ----- command line -----

int run_cli(int argc, char** argv) {
  CLI::App app{"Bayesian segmentation and shape classification of overlapping objects"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::string> out_flag;
  std::optional<std::uint64_t> seed;
  app.add_option("--config,-c", config_path, "JSON run configuration");
  app.add_option("--out,-o", out_flag, "output directory (overrides $" + std::string(kOutDirEnv) + ")");
  app.add_option("--seed", seed, "root seed");

  auto* sim = app.add_subcommand("simulate", "generate a synthetic image and its ground truth");
  std::optional<double> sim_g1, sim_g2;
  std::optional<int> sim_m;
  std::optional<long long> sim_sweeps;
  sim->add_option("--gamma1", sim_g1);
  sim->add_option("--gamma2", sim_g2);
  sim->add_option("--m", sim_m, "object count; negative lets the prior decide");
  sim->add_option("--sweeps", sim_sweeps, "equilibration sweeps");

  auto* fit = app.add_subcommand("fit", "sample the posterior for one image");
  std::string fit_image_path, resume, init;
  std::optional<long long> iters, burn, thin, ck_every;
  std::optional<double> g2_fixed;
  fit->add_option("image", fit_image_path, "input image (.png or .pgm)");
  fit->add_option("--iterations", iters);
  fit->add_option("--burn-in", burn);
  fit->add_option("--thinning", thin);
  fit->add_option("--checkpoint-every", ck_every);
  fit->add_option("--init", init, "morphological or random")->check(CLI::IsMember({"morphological", "random"}));
  fit->add_option("--resume", resume, "checkpoint to continue from");
  fit->add_option("--gamma2-fixed", g2_fixed, "hold gamma2 at this value");

  auto* an = app.add_subcommand("analyze", "MAP tables, classification, histograms and overlay");
  std::string samples_path, an_image, field;
  std::optional<int> bins;
  an->add_option("--samples", samples_path)->required();
  an->add_option("--image", an_image)->required();
  an->add_option("--field", field, "only this histogram: s, mu, g or T")->check(CLI::IsMember({"s", "mu", "g", "T"}));
  an->add_option("--bins", bins, "histogram bins (0: Freedman-Diaconis)");

  auto* st = app.add_subcommand("study", "gamma2 random vs fixed comparison on simulated fixtures");
  std::optional<int> reps;
  std::optional<double> st_g2;
  std::optional<long long> st_iters;
  st->add_option("--replicates", reps);
  st->add_option("--gamma2-fixed", st_g2);
  st->add_option("--iterations", st_iters);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) cfg.sampler.seed = *seed;
    std::string out = resolve_out_dir(out_flag, cfg);

    if (sim->parsed()) {
      if (sim_g1) cfg.simulation.gamma.gamma1 = *sim_g1;
      if (sim_g2) cfg.simulation.gamma.gamma2 = *sim_g2;
      if (sim_m) cfg.simulation.objects = *sim_m;
      if (sim_sweeps) cfg.simulation.equilibration_sweeps = *sim_sweeps;
      cfg.validate();
      auto gt = cmd_simulate(cfg, out);
      std::cout << "simulated " << gt.cfg.m() << " objects into " << out << "\n";
    } else if (fit->parsed()) {
      if (iters) cfg.sampler.iterations = *iters;
      if (burn) cfg.sampler.burn_in = *burn;
      if (thin) cfg.sampler.thinning = *thin;
      if (ck_every) cfg.sampler.checkpoint_every = *ck_every;
      if (!init.empty()) cfg.init = init == "random" ? InitMethod::Random : InitMethod::Morphological;
      if (g2_fixed) {
        InteractionParams g = cfg.start_gamma();
        g.gamma2 = *g2_fixed;
        cfg.initial_gamma = g;
        cfg.sampler.gamma2_random = false;
      }
      if (fit_image_path.empty()) fit_image_path = cfg.io.image;
      if (fit_image_path.empty()) throw ConfigError("no input image given");
      cfg.validate();
      auto r = cmd_fit(cfg, fit_image_path, out, resume);
      std::cout << "fit: " << r.summary.final_state.iteration << " iterations, " << r.samples.size()
                << " samples, final m = " << r.summary.final_state.cfg.m() << "\n";
    } else if (an->parsed()) {
      if (bins) cfg.report.bins = *bins;
      cfg.validate();
      std::optional<HistField> only;
      if (!field.empty()) only = hist_field_from_name(field);
      cmd_analyze(cfg, samples_path, an_image, out, only);
      std::cout << "analysis written to " << out << "\n";
    } else if (st->parsed()) {
      if (reps) cfg.study.replicates = *reps;
      if (st_g2) cfg.study.gamma2_fixed = *st_g2;
      if (st_iters) cfg.sampler.iterations = *st_iters;
      cfg.validate();
      auto rows = cmd_study(cfg, out);
      std::cout << "study: " << rows.size() << " fits, table in " << join(out, "study.csv") << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace mppseg

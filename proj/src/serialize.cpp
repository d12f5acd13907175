#include "mppseg/serialize.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mppseg/image.hpp"

namespace mppseg {

namespace {

// Reads the keys of one object; anything left unread at the end is an error.
class Fields {
 public:
  Fields(const json& j, const char* what) : j_(j), what_(what) {
    if (!j.is_object()) throw ConfigError(std::string(what) + ": expected an object");
  }
  template <class T>
  void opt(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      it->get_to(out);
    } catch (const json::exception& e) {
      throw ConfigError(std::string(what_) + "." + key + ": " + e.what());
    }
  }
  template <class T>
  void req(const char* key, T& out) {
    if (!j_.contains(key)) throw ConfigError(std::string(what_) + ": missing '" + key + "'");
    opt(key, out);
  }
  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(std::string(what_) + ": unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  const char* what_;
  std::set<std::string> seen_;
};

std::string kind_str(TemplateKind k) { return template_name(k); }

TemplateKind kind_of(const json& j) {
  try {
    return template_from_name(j.get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("template: ") + e.what());
  }
}

std::vector<TemplateKind> kinds_of(const json& j) {
  if (!j.is_array()) throw ConfigError("templates: expected an array");
  std::vector<TemplateKind> out;
  for (const auto& e : j) out.push_back(kind_of(e));
  return out;
}

json kinds_json(const std::vector<TemplateKind>& v) {
  json a = json::array();
  for (auto k : v) a.push_back(kind_str(k));
  return a;
}

void fmt(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

double num(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || errno == ERANGE) throw IoError("bad number in sample row: '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void to_json(json& j, const Point& p) { j = json::array({p.x, p.y}); }
void from_json(const json& j, Point& p) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("point: expected [x, y]");
  p.x = j[0].get<double>();
  p.y = j[1].get<double>();
}

void to_json(json& j, const ObjectParams& o) {
  j = {{"template", kind_str(o.kind)}, {"center", o.center}, {"scale", o.scale}, {"rotation", o.rotation}};
  if (has_pure(o.kind)) j["pure"] = o.pure;
}
void from_json(const json& j, ObjectParams& o) {
  Fields f(j, "object");
  json kind;
  f.req("template", kind);
  o.kind = kind_of(kind);
  f.req("center", o.center);
  f.req("scale", o.scale);
  f.opt("rotation", o.rotation);
  o.pure = 0;
  if (has_pure(o.kind))
    f.req("pure", o.pure);
  f.done();
}

void to_json(json& j, const Configuration& c) { j = c.objects; }
void from_json(const json& j, Configuration& c) {
  if (!j.is_array()) throw ConfigError("configuration: expected an array of objects");
  c.objects = j.get<std::vector<ObjectParams>>();
}

void to_json(json& j, const IntensityParams& v) { j = {{"mean", v.mean}, {"variance", v.variance}}; }
void from_json(const json& j, IntensityParams& v) {
  Fields f(j, "intensities");
  f.req("mean", v.mean);
  f.req("variance", v.variance);
  f.done();
  if (v.mean.size() != v.variance.size()) throw ConfigError("intensities: mean and variance lengths differ");
}

void to_json(json& j, const InteractionParams& g) { j = {{"gamma1", g.gamma1}, {"gamma2", g.gamma2}}; }
void from_json(const json& j, InteractionParams& g) {
  Fields f(j, "gamma");
  f.opt("gamma1", g.gamma1);
  f.opt("gamma2", g.gamma2);
  f.done();
}

void to_json(json& j, const Frame& fr) { j = {{"width", fr.width}, {"height", fr.height}}; }
void from_json(const json& j, Frame& fr) {
  Fields f(j, "frame");
  f.req("width", fr.width);
  f.req("height", fr.height);
  f.done();
}

void to_json(json& j, const BetaPrior& b) { j = {{"lo", b.lo}, {"hi", b.hi}, {"alpha", b.alpha}, {"beta", b.beta}}; }
void from_json(const json& j, BetaPrior& b) {
  Fields f(j, "beta_prior");
  f.opt("lo", b.lo);
  f.opt("hi", b.hi);
  f.opt("alpha", b.alpha);
  f.opt("beta", b.beta);
  f.done();
}

void to_json(json& j, const LogNormalPrior& l) { j = {{"location", l.location}, {"scale", l.scale}}; }
void from_json(const json& j, LogNormalPrior& l) {
  Fields f(j, "lognormal_prior");
  f.opt("location", l.location);
  f.opt("scale", l.scale);
  f.done();
}

void to_json(json& j, const IntensitySupport& s) {
  j = {{"mean_min", s.mean_min}, {"mean_max", s.mean_max}, {"var_min", s.var_min}, {"var_max", s.var_max}};
}
void from_json(const json& j, IntensitySupport& s) {
  Fields f(j, "intensity_support");
  f.opt("mean_min", s.mean_min);
  f.opt("mean_max", s.mean_max);
  f.opt("var_min", s.var_min);
  f.opt("var_max", s.var_max);
  f.done();
}

void to_json(json& j, const MarkLattice& l) { j = {{"centers", l.centers}, {"scales", l.scales}}; }
void from_json(const json& j, MarkLattice& l) {
  Fields f(j, "lattice");
  f.req("centers", l.centers);
  f.req("scales", l.scales);
  f.done();
}

void to_json(json& j, const PriorConfig& p) {
  j = {{"s_min", p.s_min},
       {"s_max", p.s_max},
       {"ellipse", p.ellipse},
       {"triangle", p.triangle},
       {"gamma1", p.gamma1},
       {"gamma2", p.gamma2},
       {"templates", kinds_json(p.templates)},
       {"interaction_mode", p.mode == InteractionMode::TwoWayPairwise ? "two_way" : "area"},
       {"center_margin", p.center_margin},
       {"area_unit", p.area_unit},
       {"intensity", p.intensity},
       {"require_visible", p.require_visible}};
  j["lattice"] = p.lattice ? json(*p.lattice) : json(nullptr);
}
void from_json(const json& j, PriorConfig& p) {
  Fields f(j, "prior");
  f.opt("s_min", p.s_min);
  f.opt("s_max", p.s_max);
  f.opt("ellipse", p.ellipse);
  f.opt("triangle", p.triangle);
  f.opt("gamma1", p.gamma1);
  f.opt("gamma2", p.gamma2);
  json t, mode, lat;
  f.opt("templates", t);
  if (!t.is_null()) p.templates = kinds_of(t);
  f.opt("interaction_mode", mode);
  if (!mode.is_null()) {
    std::string m = mode.get<std::string>();
    if (m == "area")
      p.mode = InteractionMode::AreaOfMultiCoverage;
    else if (m == "two_way")
      p.mode = InteractionMode::TwoWayPairwise;
    else
      throw ConfigError("prior.interaction_mode: expected 'area' or 'two_way'");
  }
  f.opt("center_margin", p.center_margin);
  f.opt("area_unit", p.area_unit);
  f.opt("intensity", p.intensity);
  f.opt("require_visible", p.require_visible);
  if (j.contains("lattice")) {
    f.opt("lattice", lat);
    if (lat.is_null())
      p.lattice.reset();
    else
      p.lattice = lat.get<MarkLattice>();
  }
  f.done();
}

void to_json(json& j, const MoveProbabilities& m) {
  j = {{"birth", m.birth}, {"death", m.death}, {"split", m.split}, {"merge", m.merge}};
}
void from_json(const json& j, MoveProbabilities& m) {
  Fields f(j, "moves");
  f.opt("birth", m.birth);
  f.opt("death", m.death);
  f.opt("split", m.split);
  f.opt("merge", m.merge);
  f.done();
}

void to_json(json& j, const StepSizes& s) {
  j = {{"center", s.center}, {"scale", s.scale}, {"rotation", s.rotation}, {"pure", s.pure},
       {"mean", s.mean},     {"log_variance", s.log_variance}, {"log_gamma", s.log_gamma}};
}
void from_json(const json& j, StepSizes& s) {
  Fields f(j, "steps");
  f.opt("center", s.center);
  f.opt("scale", s.scale);
  f.opt("rotation", s.rotation);
  f.opt("pure", s.pure);
  f.opt("mean", s.mean);
  f.opt("log_variance", s.log_variance);
  f.opt("log_gamma", s.log_gamma);
  f.done();
}

void to_json(json& j, const SamplerConfig& c) {
  j = {{"moves", c.moves},
       {"steps", c.steps},
       {"mcmh_aux_count", c.mcmh_aux_count},
       {"aux_spacing", c.aux_spacing},
       {"mcmh", c.mcmh},
       {"iterations", c.iterations},
       {"burn_in", c.burn_in},
       {"thinning", c.thinning},
       {"neighbor_distance_factor", c.neighbor_distance_factor},
       {"gamma1_random", c.gamma1_random},
       {"gamma2_random", c.gamma2_random},
       {"swap", c.swap},
       {"update_marks", c.update_marks},
       {"update_intensities", c.update_intensities},
       {"fixed_mean", c.fixed_mean},
       {"fixed_variance", c.fixed_variance},
       {"m_max", c.m_max},
       {"checkpoint_every", c.checkpoint_every}};
}
void from_json(const json& j, SamplerConfig& c) {
  Fields f(j, "sampler");
  f.opt("moves", c.moves);
  f.opt("steps", c.steps);
  f.opt("mcmh_aux_count", c.mcmh_aux_count);
  f.opt("aux_spacing", c.aux_spacing);
  f.opt("mcmh", c.mcmh);
  f.opt("iterations", c.iterations);
  f.opt("burn_in", c.burn_in);
  f.opt("thinning", c.thinning);
  f.opt("neighbor_distance_factor", c.neighbor_distance_factor);
  f.opt("gamma1_random", c.gamma1_random);
  f.opt("gamma2_random", c.gamma2_random);
  f.opt("swap", c.swap);
  f.opt("update_marks", c.update_marks);
  f.opt("update_intensities", c.update_intensities);
  f.opt("fixed_mean", c.fixed_mean);
  f.opt("fixed_variance", c.fixed_variance);
  f.opt("m_max", c.m_max);
  f.opt("checkpoint_every", c.checkpoint_every);
  f.done();
}

void to_json(json& j, const SimulationConfig& c) {
  j = {{"frame", c.frame},
       {"objects", c.objects},
       {"gamma", c.gamma},
       {"equilibration_sweeps", c.equilibration_sweeps},
       {"background_mean", c.background_mean},
       {"object_mean_lo", c.object_mean_lo},
       {"object_mean_hi", c.object_mean_hi},
       {"sigma_lo", c.sigma_lo},
       {"sigma_hi", c.sigma_hi},
       {"scale_min", c.scale_min},
       {"scale_max", c.scale_max},
       {"templates", kinds_json(c.templates)},
       {"fully_visible", c.fully_visible},
       {"non_overlapping", c.non_overlapping}};
}
void from_json(const json& j, SimulationConfig& c) {
  Fields f(j, "simulation");
  f.opt("frame", c.frame);
  f.opt("objects", c.objects);
  f.opt("gamma", c.gamma);
  f.opt("equilibration_sweeps", c.equilibration_sweeps);
  f.opt("background_mean", c.background_mean);
  f.opt("object_mean_lo", c.object_mean_lo);
  f.opt("object_mean_hi", c.object_mean_hi);
  f.opt("sigma_lo", c.sigma_lo);
  f.opt("sigma_hi", c.sigma_hi);
  f.opt("scale_min", c.scale_min);
  f.opt("scale_max", c.scale_max);
  json t;
  f.opt("templates", t);
  if (!t.is_null()) c.templates = kinds_of(t);
  f.opt("fully_visible", c.fully_visible);
  f.opt("non_overlapping", c.non_overlapping);
  f.done();
}

void to_json(json& j, const InitOptions& o) {
  j = {{"median_filter", o.median_filter},
       {"min_region_area", o.min_region_area},
       {"marker_persistence", o.marker_persistence}};
}
void from_json(const json& j, InitOptions& o) {
  Fields f(j, "init_options");
  f.opt("median_filter", o.median_filter);
  f.opt("min_region_area", o.min_region_area);
  f.opt("marker_persistence", o.marker_persistence);
  f.done();
}

void to_json(json& j, const ChainState& s) {
  j = {{"iteration", s.iteration}, {"gamma", s.gamma}, {"objects", s.cfg}, {"intensities", s.ints}};
}
void from_json(const json& j, ChainState& s) {
  Fields f(j, "state");
  f.req("iteration", s.iteration);
  f.req("gamma", s.gamma);
  f.req("objects", s.cfg);
  f.req("intensities", s.ints);
  f.done();
  if (s.ints.size() != s.cfg.m() + 1) throw ConfigError("state: intensities must have m + 1 entries");
}

void to_json(json& j, const GroundTruth& g) {
  j = {{"frame", g.frame}, {"seed", g.seed}, {"gamma", g.gamma}, {"objects", g.cfg}, {"intensities", g.ints}};
}
void from_json(const json& j, GroundTruth& g) {
  Fields f(j, "ground_truth");
  f.req("frame", g.frame);
  f.req("seed", g.seed);
  f.req("gamma", g.gamma);
  f.req("objects", g.cfg);
  f.req("intensities", g.ints);
  f.done();
  if (g.ints.size() != g.cfg.m() + 1) throw ConfigError("ground_truth: intensities must have m + 1 entries");
}

void to_json(json& j, const Checkpoint& c) {
  j = {{"state", c.state}, {"chain_rng", c.chain_rng}, {"aux_rng", c.aux_rng}, {"aux_objects", c.aux_config}};
}
void from_json(const json& j, Checkpoint& c) {
  Fields f(j, "checkpoint");
  f.req("state", c.state);
  f.req("chain_rng", c.chain_rng);
  f.req("aux_rng", c.aux_rng);
  f.req("aux_objects", c.aux_config);
  f.done();
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_json(const json& j, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + path);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot write " + path + ": " + ec.message());
}

std::string sample_header() { return "iteration,m,gamma1,gamma2,log_post,mu0,var0,objects"; }

std::string format_sample(const PosteriorSample& s) {
  std::string out = std::to_string(s.iteration) + "," + std::to_string(s.cfg.m());
  for (double v : {s.gamma.gamma1, s.gamma.gamma2, s.log_post, s.ints.mean.at(0), s.ints.variance.at(0)}) {
    out += ',';
    fmt(out, v);
  }
  for (std::size_t i = 0; i < s.cfg.m(); ++i) {
    const auto& o = s.cfg.objects[i];
    out += ',';
    out += kind_str(o.kind);
    for (double v : {o.center.x, o.center.y, o.scale, o.rotation, o.pure, s.ints.mean.at(i + 1),
                     s.ints.variance.at(i + 1)}) {
      out += ',';
      fmt(out, v);
    }
  }
  return out;
}

PosteriorSample parse_sample(const std::string& line) {
  auto f = split_csv(line);
  if (f.size() < 7) throw IoError("short sample row");
  PosteriorSample s;
  s.iteration = std::stoull(f[0]);
  std::size_t m = std::stoull(f[1]);
  if (f.size() != 7 + 8 * m) throw IoError("sample row has " + std::to_string(f.size()) + " fields, expected " +
                                           std::to_string(7 + 8 * m));
  s.gamma = {num(f[2]), num(f[3])};
  s.log_post = num(f[4]);
  s.ints.mean.push_back(num(f[5]));
  s.ints.variance.push_back(num(f[6]));
  for (std::size_t i = 0; i < m; ++i) {
    const std::string* r = &f[7 + 8 * i];
    ObjectParams o;
    try {
      o.kind = template_from_name(r[0]);
    } catch (const std::exception&) {
      throw IoError("unknown template '" + r[0] + "' in sample row");
    }
    o.center = {num(r[1]), num(r[2])};
    o.scale = num(r[3]);
    o.rotation = num(r[4]);
    o.pure = num(r[5]);
    s.cfg.objects.push_back(o);
    s.ints.mean.push_back(num(r[6]));
    s.ints.variance.push_back(num(r[7]));
  }
  return s;
}

void write_samples(const std::vector<PosteriorSample>& v, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << sample_header() << '\n';
  for (const auto& s : v) out << format_sample(s) << '\n';
  if (!out) throw IoError("cannot write " + path);
}

std::vector<PosteriorSample> read_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("iteration,", 0) != 0) throw IoError(path + ": missing sample header");
  std::vector<PosteriorSample> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    try {
      out.push_back(parse_sample(line));
    } catch (const std::exception& e) {
      throw IoError(path + ":" + std::to_string(row) + ": " + e.what());
    }
  }
  return out;
}

// ----- run configuration -----

PriorConfig RunConfig::default_fit_prior() {
  PriorConfig p;
  p.area_unit = 300;
  // a few-pixel object with its own mean and variance can always buy likelihood from noise
  p.s_min = 3;
  return p;
}

InteractionParams RunConfig::start_gamma() const {
  if (initial_gamma) return *initial_gamma;
  return {std::exp(prior.gamma1.location), std::exp(prior.gamma2.location)};
}

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
  try {
    prior.validate();
    sampler.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (simulation.frame.width <= 0 || simulation.frame.height <= 0) throw ConfigError("simulation.frame must be positive");
  if (!(simulation.scale_min > 0 && simulation.scale_min < simulation.scale_max))
    throw ConfigError("simulation scale range must satisfy 0 < scale_min < scale_max");
  if (simulation.templates.empty()) throw ConfigError("simulation.templates is empty");
  if (!(simulation.sigma_lo > 0 && simulation.sigma_lo <= simulation.sigma_hi))
    throw ConfigError("simulation sigma range must satisfy 0 < sigma_lo <= sigma_hi");
  if (simulation.object_mean_lo > simulation.object_mean_hi) throw ConfigError("simulation mean range is reversed");
  if (simulation.equilibration_sweeps < 0) throw ConfigError("simulation.equilibration_sweeps must be >= 0");
  if (init_options.min_region_area < 1) throw ConfigError("init_options.min_region_area must be >= 1");
  if (initial_gamma && !(initial_gamma->gamma1 >= 0 && initial_gamma->gamma2 >= 0))
    throw ConfigError("initial_gamma must be non-negative");
  if (!initial_gamma && !(sampler.gamma1_random && sampler.gamma2_random))
    throw ConfigError("initial_gamma is required when a gamma is held fixed");
  if (report.bins < 0) throw ConfigError("report.bins must be >= 0");
  if (study.replicates < 1) throw ConfigError("study.replicates must be >= 1");
  if (io.image_format != "png" && io.image_format != "pgm") throw ConfigError("io.image_format must be png or pgm");
}

void to_json(json& j, const RunConfig& c) {
  j = {{"schema_version", c.schema_version},
       {"seed", c.sampler.seed},
       {"prior", c.prior},
       {"sampler", c.sampler},
       {"simulation", c.simulation},
       {"init", c.init == InitMethod::Random ? "random" : "morphological"},
       {"init_options", c.init_options},
       {"report", {{"bins", c.report.bins}}},
       {"study", {{"replicates", c.study.replicates}, {"gamma2_fixed", c.study.gamma2_fixed}}},
       {"io", {{"image", c.io.image}, {"out_dir", c.io.out_dir}, {"image_format", c.io.image_format}}}};
  j["initial_gamma"] = c.initial_gamma ? json(*c.initial_gamma) : json(nullptr);
}

void from_json(const json& j, RunConfig& c) {
  Fields f(j, "config");
  f.req("schema_version", c.schema_version);
  if (c.schema_version != RunConfig::kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
  f.opt("seed", c.sampler.seed);
  f.opt("prior", c.prior);
  std::uint64_t seed = c.sampler.seed;
  f.opt("sampler", c.sampler);
  c.sampler.seed = seed;
  f.opt("simulation", c.simulation);
  json init, ig, rep, study, io;
  f.opt("init", init);
  if (!init.is_null()) {
    std::string s = init.get<std::string>();
    if (s == "random")
      c.init = InitMethod::Random;
    else if (s == "morphological")
      c.init = InitMethod::Morphological;
    else
      throw ConfigError("init: expected 'morphological' or 'random'");
  }
  f.opt("init_options", c.init_options);
  if (j.contains("initial_gamma")) {
    f.opt("initial_gamma", ig);
    if (ig.is_null())
      c.initial_gamma.reset();
    else
      c.initial_gamma = ig.get<InteractionParams>();
  }
  f.opt("report", rep);
  if (!rep.is_null()) {
    Fields r(rep, "report");
    r.opt("bins", c.report.bins);
    r.done();
  }
  f.opt("study", study);
  if (!study.is_null()) {
    Fields s(study, "study");
    s.opt("replicates", c.study.replicates);
    s.opt("gamma2_fixed", c.study.gamma2_fixed);
    s.done();
  }
  f.opt("io", io);
  if (!io.is_null()) {
    Fields p(io, "io");
    p.opt("image", c.io.image);
    p.opt("out_dir", c.io.out_dir);
    p.opt("image_format", c.io.image_format);
    p.done();
  }
  f.done();
}

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  try {
    from_json(j, c);
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_json(path)); }

}  // namespace mppseg

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "gen.hpp"
#include "mppseg/serialize.hpp"

using namespace mppseg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("mppseg_unit_" + std::to_string(::getpid())) / name;
  fs::create_directories(p.parent_path());
  return p;
}

}  // namespace

TEST_SUITE("serialize") {
  TEST_CASE("run config round-trips") {
    RunConfig c;
    c.sampler.seed = 1234;
    c.sampler.iterations = 77;
    c.prior.templates = {TemplateKind::Circle, TemplateKind::Square};
    c.prior.lattice = MarkLattice{{{1, 2}}, {3}};
    c.initial_gamma = InteractionParams{2, 3};
    c.init = InitMethod::Random;
    c.study.replicates = 4;
    RunConfig back = parse_run_config(json(c));
    CHECK(back == c);
  }

  TEST_CASE("unknown keys and bad schema versions are rejected") {
    json j = RunConfig{};
    j["sampler"]["iteratons"] = 5;
    CHECK_THROWS_AS(parse_run_config(j), ConfigError);
    json k = RunConfig{};
    k["schema_version"] = 99;
    CHECK_THROWS_AS(parse_run_config(k), ConfigError);
    json l = RunConfig{};
    l["prior"]["templates"] = {"hexagon"};
    CHECK_THROWS(parse_run_config(l));
  }

  TEST_CASE("missing or malformed files") {
    CHECK_THROWS_AS(read_json("/nonexistent/x.json"), IoError);
    auto p = scratch("bad.json");
    std::ofstream(p) << "{ not json";
    CHECK_THROWS_AS(read_json(p.string()), ConfigError);
  }

  TEST_CASE("sample rows round-trip exactly") {
    Rng rng = Rng::stream(60, "t-csv");
    Frame f{100, 100};
    std::vector<PosteriorSample> v;
    for (int i = 0; i < 20; ++i) {
      PosteriorSample s;
      s.iteration = std::uint64_t(i * 7);
      s.gamma = {rng.uniform(0, 50), rng.uniform(0, 50)};
      s.log_post = rng.normal(-1e4, 100);
      s.cfg = gen::config(rng, f, rng.index(4));
      s.ints = gen::intensities(rng, s.cfg.m());
      v.push_back(s);
      CHECK(parse_sample(format_sample(s)) == s);
    }
    auto p = scratch("samples.csv");
    write_samples(v, p.string());
    CHECK(read_samples(p.string()) == v);
    CHECK_THROWS_AS(parse_sample("1,2,3"), std::exception);
  }

  TEST_CASE("checkpoint round-trips") {
    Rng rng = Rng::stream(61, "t-ck");
    Checkpoint c;
    c.state.cfg = gen::config(rng, {50, 50}, 3);
    c.state.ints = gen::intensities(rng, 3);
    c.state.gamma = {1.5, 2.5};
    c.state.iteration = 42;
    Rng r(9);
    r.normal();
    c.chain_rng = r.state();
    c.aux_rng = Rng(10).state();
    c.aux_config = gen::config(rng, {50, 50}, 2);
    auto p = scratch("ck.json");
    write_json(json(c), p.string());
    Checkpoint back = read_json(p.string()).get<Checkpoint>();
    CHECK(back.state == c.state);
    CHECK(back.chain_rng == c.chain_rng);
    CHECK(back.aux_config == c.aux_config);
    Rng r2(0);
    r2.set_state(back.chain_rng);
    CHECK(r2.bits() == r.bits());
  }
}

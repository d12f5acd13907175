// serial vs OpenMP label-map and likelihood kernels on a square frame with
// a few dozen random objects
#include <benchmark/benchmark.h>

#include "mppseg/kernels.hpp"
#include "mppseg/rng.hpp"

using namespace mppseg;

namespace {

struct Scene {
  Frame f;
  std::vector<Raster> rasters;
  std::vector<double> means, vars;
  std::vector<int> values, owner, cover;
};

Scene scene(int side) {
  Scene s;
  s.f = {side, side};
  Rng rng(11);
  s.means = {200};
  s.vars = {400};
  int n = side / 16;
  for (int i = 0; i < n; ++i) {
    ObjectParams o;
    o.kind = TemplateKind(rng.index(4));
    o.center = {rng.uniform() * side, rng.uniform() * side};
    o.scale = 4 + rng.uniform() * side / 12.0;
    o.rotation = rng.uniform() * 6.28 - 3.14;
    o.pure = o.kind == TemplateKind::Triangle ? 2.0 : 1.5;
    s.rasters.push_back(rasterize(o, s.f));
    s.means.push_back(40 + rng.uniform() * 100);
    s.vars.push_back(100 + rng.uniform() * 300);
  }
  s.values.resize(s.f.pixels());
  for (auto& v : s.values) v = 1 + int(rng.index(256));
  kernels::serial::label_map(s.rasters, s.means, s.f, s.owner, s.cover);
  return s;
}

void label_map_serial(benchmark::State& st) {
  Scene s = scene(int(st.range(0)));
  for (auto _ : st) {
    kernels::serial::label_map(s.rasters, s.means, s.f, s.owner, s.cover);
    benchmark::DoNotOptimize(s.owner.data());
  }
}

void label_map_omp(benchmark::State& st) {
  Scene s = scene(int(st.range(0)));
  for (auto _ : st) {
    kernels::omp::label_map(s.rasters, s.means, s.f, s.owner, s.cover);
    benchmark::DoNotOptimize(s.owner.data());
  }
}

void likelihood_serial(benchmark::State& st) {
  Scene s = scene(int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::log_likelihood(s.values, s.owner, s.means, s.vars));
}

void likelihood_omp(benchmark::State& st) {
  Scene s = scene(int(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::omp::log_likelihood(s.values, s.owner, s.means, s.vars, s.f.width));
}

void sample_serial(benchmark::State& st) {
  Scene s = scene(int(st.range(0)));
  std::vector<double> out;
  for (auto _ : st) {
    kernels::serial::sample_pixels(s.owner, s.means, s.vars, s.f, 5, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void sample_omp(benchmark::State& st) {
  Scene s = scene(int(st.range(0)));
  std::vector<double> out;
  for (auto _ : st) {
    kernels::omp::sample_pixels(s.owner, s.means, s.vars, s.f, 5, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

BENCHMARK(label_map_serial)->Arg(256)->Arg(1024);
BENCHMARK(label_map_omp)->Arg(256)->Arg(1024);
BENCHMARK(likelihood_serial)->Arg(256)->Arg(1024);
BENCHMARK(likelihood_omp)->Arg(256)->Arg(1024);
BENCHMARK(sample_serial)->Arg(256)->Arg(1024);
BENCHMARK(sample_omp)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();

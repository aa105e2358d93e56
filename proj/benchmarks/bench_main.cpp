#include "defectmc/pipeline.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace defectmc;

const TightBindingModel& graphene() {
  static const TightBindingModel model = GrapheneNNModel{}.build();
  return model;
}

const TightBindingModel& synthetic() {
  static const TightBindingModel model =
      load_coupling_table(std::string(DEFECTMC_DATA_DIR) + "/synthetic_11band.tb").build();
  return model;
}

DefectConfiguration sample(const Supercell& sc, double p) { return sample_defects(sc, p, {1, 1, 0, 0}); }

void BM_AssembleGraphene(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Supercell sc(graphene().lattice, n);
  const auto d = sample(sc, 0.0625);
  const Vec2 k(0.11, 0.07);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_bloch(graphene(), sc, d, k));
}
BENCHMARK(BM_AssembleGraphene)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_SolveGraphene(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const bool gamma = state.range(1) != 0;
  const Supercell sc(graphene().lattice, n);
  const auto pair = assemble_bloch(graphene(), sc, sample(sc, 0.0625), gamma ? Vec2(0, 0) : Vec2(0.11, 0.07));
  for (auto _ : state) benchmark::DoNotOptimize(solve_generalized(pair));
  state.SetLabel(gamma ? "real" : "complex");
}
BENCHMARK(BM_SolveGraphene)->Args({4, 0})->Args({8, 0})->Args({16, 0})->Args({16, 1})->Unit(benchmark::kMillisecond);

void BM_SolveSynthetic(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Supercell sc(synthetic().lattice, n);
  const auto pair = assemble_bloch(synthetic(), sc, sample(sc, 0.05), Vec2(0.11, 0.07));
  for (auto _ : state) benchmark::DoNotOptimize(solve_generalized(pair));
}
BENCHMARK(BM_SolveSynthetic)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_AccumulateIdos(benchmark::State& state) {
  const Supercell sc(graphene().lattice, 16);
  const auto bands = solve_bands(graphene(), sc, sample(sc, 0.0625), make_bz_grid(graphene().lattice, 16, 1));
  const auto grid = EnergyGrid::spanning(-7.0, 15.0, static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(grid.points);
  for (auto _ : state) {
    std::fill(out.begin(), out.end(), 0.0);
    accumulate_idos(bands, grid, {0.01}, 256.0, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_AccumulateIdos)->Arg(2048)->Arg(16384)->Unit(benchmark::kMicrosecond);

void BM_ControlVariateSample(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  PipelineSettings s;
  s.p_vac = 0.0625;
  s.grid = EnergyGrid::spanning(-7.0, 15.0, 2048);
  s.use_cache = false;
  const SamplePipeline pipeline(graphene(), s);
  std::int64_t m = 0;
  for (auto _ : state) {
    const auto omega = pipeline.draw(n, {3, 2, m++, 0});
    benchmark::DoNotOptimize(pipeline.control_variate_sample(n, 16 / n, omega));
  }
}
BENCHMARK(BM_ControlVariateSample)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <string>

#include "hyzeno/dynamics.hpp"
#include "hyzeno/prolongation.hpp"
#include "hyzeno/sampling.hpp"
#include "hyzeno/simulator.hpp"
#include "hyzeno/stability.hpp"
#include "hyzeno/system_spec.hpp"

using namespace hyzeno;

static void BM_SimulateBall(benchmark::State& state) {
  const SystemData ball = builtin_scenario("bouncing_ball");
  for (auto _ : state) benchmark::DoNotOptimize(simulate(ball, State{1.0, 0.0}, SimConfig{}));
}
BENCHMARK(BM_SimulateBall)->Unit(benchmark::kMillisecond);

static void BM_SimulateExtendedTwoBalls(benchmark::State& state) {
  const SystemData sys = builtin_scenario("two_balls");
  for (auto _ : state) benchmark::DoNotOptimize(simulate_extended(sys, State{3.0, 0.0, 1.0, 0.0}, SimConfig{}));
}
BENCHMARK(BM_SimulateExtendedTwoBalls)->Unit(benchmark::kMillisecond);

static void BM_EvalLyapunovCandidate(benchmark::State& state) {
  const SystemData sys = builtin_scenario("example3");
  const LyapunovCertificate cert =
      parse_certificate(sys, read_text_file(std::string(HYZENO_DATA_DIR) + "/V_ball.json"));
  const State x{1.0, -2.0, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(eval_real(cert.V, sys.env(x)));
}
BENCHMARK(BM_EvalLyapunovCandidate);

static void BM_CheckLyapunov(benchmark::State& state) {
  const SystemData sys = builtin_scenario("example3");
  const LyapunovCertificate cert =
      parse_certificate(sys, read_text_file(std::string(HYZENO_DATA_DIR) + "/V_ball.json"));
  const SampleSpec grid{{{0, -10, -5}, {5, 10, 5}}, static_cast<std::size_t>(state.range(0)), 0.25, 0};
  for (auto _ : state) benchmark::DoNotOptimize(check_lyapunov(sys, cert, grid));
}
BENCHMARK(BM_CheckLyapunov)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

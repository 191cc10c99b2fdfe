#include <benchmark/benchmark.h>

#include "mas/adaptive/knowledge.hpp"
#include "mas/grid/fault_solver.hpp"
#include "mas/sim/engine.hpp"
#include "mas/text.hpp"

using namespace mas;

namespace {

const grid::Network& fig1() {
  static const grid::Network net = grid::build_network(text::read_file(MAS_DATA_DIR "/networks/fig1.net"));
  return net;
}

const adaptive::KnowledgeBase& fig1_kb() {
  static const adaptive::KnowledgeBase kb = adaptive::build_knowledge(fig1());
  return kb;
}

std::string scenario(const char* name) { return text::read_file(std::string(MAS_DATA_DIR "/scenarios/") + name); }

}  // namespace

static void BM_SolveFault(benchmark::State& state) {
  const auto& net = fig1();
  const grid::FaultSpec f{"B3", 0.5, {0.0, 0.0}, true};
  for (auto _ : state) benchmark::DoNotOptimize(grid::solve_fault(net, f));
}
BENCHMARK(BM_SolveFault);

static void BM_SolvePrefault(benchmark::State& state) {
  const auto& net = fig1();
  for (auto _ : state) benchmark::DoNotOptimize(grid::solve_prefault(net));
}
BENCHMARK(BM_SolvePrefault);

static void BM_BuildKnowledge(benchmark::State& state) {
  const auto& net = fig1();
  for (auto _ : state) benchmark::DoNotOptimize(adaptive::build_knowledge(net));
}
BENCHMARK(BM_BuildKnowledge)->Unit(benchmark::kMillisecond);

static void BM_RunFaultScenario(benchmark::State& state) {
  const auto& net = fig1();
  const sim::SimConfig cfg;
  const auto events = sim::load_scenario(scenario("b2_fault.scn"), net, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(sim::run(net, {&fig1_kb(), {}}, events, cfg));
}
BENCHMARK(BM_RunFaultScenario)->Unit(benchmark::kMillisecond);

static void BM_RunFaultSweep(benchmark::State& state) {
  const auto& net = fig1();
  sim::SimConfig cfg;
  cfg.horizon = SimTime::from_seconds(42.0);
  const auto events = sim::load_scenario(scenario("fault_sweep.scn"), net, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(sim::run(net, {&fig1_kb(), {}}, events, cfg));
}
BENCHMARK(BM_RunFaultSweep)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <random>

#include "macsim/scenario.hpp"

using namespace macsim;
using namespace std::chrono_literals;

namespace {

// Schedule n events at random instants, then drain the queue.
void BM_KernelScheduleDrain(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<long long> ns(0, 1'000'000'000);
  for (auto _ : state) {
    Simulator sim;
    long long hits = 0;
    for (int i = 0; i < n; ++i) {
      sim.schedule(kSimStart + Duration{ns(gen)}, 0, EventKind::kGeneric, [&hits] { ++hits; });
    }
    sim.run_until(kSimStart + 2s);
    benchmark::DoNotOptimize(hits);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_KernelScheduleDrain)->Arg(1 << 10)->Arg(1 << 16);

void run_protocol(benchmark::State& state, Protocol proto, std::uint32_t frag) {
  RunConfig rc;
  rc.protocol = proto;
  rc.fragment_payload = frag;
  rc.node_count = static_cast<int>(state.range(0));
  rc.duration = 100s;
  std::uint64_t events = 0;
  for (auto _ : state) {
    const auto res = run_once(rc);
    events += res.events;
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}

void BM_Bop100s(benchmark::State& state) { run_protocol(state, Protocol::kBop, 16); }
void BM_Frog16_100s(benchmark::State& state) { run_protocol(state, Protocol::kFrog, 16); }
void BM_Frog2_100s(benchmark::State& state) { run_protocol(state, Protocol::kFrog, 2); }

BENCHMARK(BM_Bop100s)->Arg(2)->Arg(11)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Frog16_100s)->Arg(2)->Arg(11)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Frog2_100s)->Arg(2)->Arg(11)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

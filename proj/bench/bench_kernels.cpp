// Serial reference vs OpenMP kernels on a golden-rotation orbit.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <cmath>

#include "orbitlab/kernels.hpp"
#include "orbitlab/orbit.hpp"

using namespace orbitlab;
namespace ks = orbitlab::kernels::serial;
namespace kp = orbitlab::kernels::parallel;

namespace {

const Orbit& golden_orbit() {
  static const Orbit orbit = [] {
    const Space c = make_space(nlohmann::json::parse(R"({"name":"circle"})").get<SpaceSpec>());
    const nlohmann::json spec{{"name", "rotation"},
                              {"params", {{"turns", (std::sqrt(5.0) - 1.0) / 2.0}}}};
    return compute_orbit(make_map(spec.get<MapSpec>(), c), c.point({1.0, 0.0}), 20'000);
  }();
  return orbit;
}

auto dist() {
  return [&o = golden_orbit()](std::size_t n, std::size_t m) { return o.direct_distance(n, m); };
}

constexpr double kNoSlack(std::size_t, std::size_t) { return 0.0; }

struct Serial {};
struct Parallel {};

template <class Mode>
void BM_shift_extremes(benchmark::State& st) {
  const auto count = static_cast<std::size_t>(st.range(0));
  const auto d = dist();
  for (auto _ : st) {
    if constexpr (std::is_same_v<Mode, Serial>)
      benchmark::DoNotOptimize(ks::shift_extremes(count, d, kNoSlack));
    else
      benchmark::DoNotOptimize(kp::shift_extremes(count, d, kNoSlack));
  }
  st.SetItemsProcessed(st.iterations() * std::int64_t(count) * std::int64_t(count) / 2);
}

// No collisions on an irrational rotation, so the whole triangle is scanned.
template <class Mode>
void BM_first_collision(benchmark::State& st) {
  const auto count = static_cast<std::size_t>(st.range(0));
  const auto d = dist();
  for (auto _ : st) {
    if constexpr (std::is_same_v<Mode, Serial>)
      benchmark::DoNotOptimize(ks::first_collision(count, d, 1e-12));
    else
      benchmark::DoNotOptimize(kp::first_collision(count, d, 1e-12));
  }
}

template <class Mode>
void BM_first_uncovered(benchmark::State& st) {
  const auto count = static_cast<std::size_t>(st.range(0));
  const auto d = dist();
  for (auto _ : st) {
    if constexpr (std::is_same_v<Mode, Serial>)
      benchmark::DoNotOptimize(ks::first_uncovered(count, 34, d, 0.25));
    else
      benchmark::DoNotOptimize(kp::first_uncovered(count, 34, d, 0.25));
  }
}

template <class Mode>
void BM_sublemma_scan(benchmark::State& st) {
  const auto horizon = static_cast<std::size_t>(st.range(0));
  const auto d = dist();
  for (auto _ : st) {
    if constexpr (std::is_same_v<Mode, Serial>)
      benchmark::DoNotOptimize(ks::sublemma_scan(horizon, d, 0.25, 1e-12));
    else
      benchmark::DoNotOptimize(kp::sublemma_scan(horizon, d, 0.25, 1e-12));
  }
}

template <class Mode>
void BM_hausdorff(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto d = dist();
  auto cross = [&](std::size_t i, std::size_t j) { return d(i, n + j); };
  for (auto _ : st) {
    if constexpr (std::is_same_v<Mode, Serial>)
      benchmark::DoNotOptimize(ks::hausdorff(n, n, cross));
    else
      benchmark::DoNotOptimize(kp::hausdorff(n, n, cross));
  }
}

template <class Mode>
void BM_later_return_counts(benchmark::State& st) {
  const auto count = static_cast<std::size_t>(st.range(0));
  const auto d = dist();
  for (auto _ : st) {
    if constexpr (std::is_same_v<Mode, Serial>)
      benchmark::DoNotOptimize(ks::later_return_counts(count, d, 0.05, 3));
    else
      benchmark::DoNotOptimize(kp::later_return_counts(count, d, 0.05, 3));
  }
}

}  // namespace

BENCHMARK(BM_shift_extremes<Serial>)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_shift_extremes<Parallel>)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_first_collision<Serial>)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_first_collision<Parallel>)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_first_uncovered<Serial>)->Arg(20'000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_first_uncovered<Parallel>)->Arg(20'000)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_sublemma_scan<Serial>)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sublemma_scan<Parallel>)->Arg(300)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_hausdorff<Serial>)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_hausdorff<Parallel>)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_later_return_counts<Serial>)->Arg(10'000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_later_return_counts<Parallel>)->Arg(10'000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

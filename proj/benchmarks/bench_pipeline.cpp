#include <benchmark/benchmark.h>

#include <random>

#include "wmh/lesions.hpp"
#include "wmh/phantom.hpp"
#include "wmh/stackgen.hpp"

namespace {

using namespace wmh;

void BM_LabelComponents(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::bernoulli_distribution on(0.15);
  Volume3D mask({n, n, n});
  for (float& v : mask.data()) v = on(rng) ? 1.0f : 0.0f;
  for (auto _ : state) benchmark::DoNotOptimize(label_components(mask, 26));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * mask.size()));
}
BENCHMARK(BM_LabelComponents)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TiledInference(benchmark::State& state) {
  const Phantom ph = make_phantom(1, {64, 64, 64});
  const auto tile = static_cast<std::size_t>(state.range(0));
  const NetworkSpec& net = ph.ensemble.axial;
  for (auto _ : state) benchmark::DoNotOptimize(tiled_forward(net, ph.flair, TilingOptions{{tile, tile, tile}, tile / 4}));
}
BENCHMARK(BM_TiledInference)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SegmentPhantom(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Phantom ph = make_phantom(2, {n, n, n});
  for (auto _ : state) benchmark::DoNotOptimize(segment_flair(ph.ensemble, ph.flair, ph.brain_mask));
}
BENCHMARK(BM_SegmentPhantom)->Arg(64)->Arg(96)->Unit(benchmark::kMillisecond);

}  // namespace

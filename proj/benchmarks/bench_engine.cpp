#include <benchmark/benchmark.h>

#include <random>

#include "wmh/network.hpp"

namespace {

using namespace wmh;

Tensor4 noise(Shape4 shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n;
  Tensor4 t(shape);
  for (float& v : t.data()) v = n(rng);
  return t;
}

Conv3D conv(std::size_t cout, std::size_t cin, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 0.2f);
  Conv3D c;
  c.kernel_shape = {cout, cin, k, k, k};
  c.weights.resize(cout * cin * k * k * k);
  for (float& w : c.weights) w = n(rng);
  c.bias.assign(cout, 0.1f);
  c.padding = {k / 2, k / 2, k / 2};
  return c;
}

void BM_Conv3d(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ch = static_cast<std::size_t>(state.range(1));
  const Tensor4 x = noise({ch, n, n, n}, 1);
  const Conv3D c = conv(ch, ch, 3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv3d(x, c));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * n));
}
BENCHMARK(BM_Conv3d)->Args({16, 4})->Args({32, 4})->Args({32, 8})->Unit(benchmark::kMillisecond);

// Two-level U-Net of the shape used per plane: enc, pool, mid, up, skip concat, head, softmax.
NetworkSpec unet(std::size_t width) {
  NetworkSpec net;
  net.input_channels = 1;
  net.output_channels = 2;
  net.layers = {
      {"enc", conv(width, 1, 3, 3)},
      {"enc_act", ReLU{}},
      {"pool", MaxPool{}},
      {"mid", conv(2 * width, width, 3, 4)},
      {"mid_act", ReLU{}},
      {"up", UpsampleNearest{}},
      {"skip", Concat{"enc_act"}},
      {"head", conv(2, 3 * width, 1, 5)},
      {"prob", Softmax{}},
  };
  return net;
}

void BM_UnetForward32(benchmark::State& state) {
  const NetworkSpec net = unet(static_cast<std::size_t>(state.range(0)));
  const Tensor4 x = noise({1, 32, 32, 32}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(forward(net, x));
}
BENCHMARK(BM_UnetForward32)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

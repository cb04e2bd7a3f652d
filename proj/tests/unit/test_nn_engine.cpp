#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "wmh/error.hpp"
#include "wmh/network.hpp"

using namespace wmh;
using wmh::testing::Rng;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::Io;
}

Conv3D pointwise_identity(std::size_t channels) {
  Conv3D c;
  c.kernel_shape = {channels, channels, 1, 1, 1};
  c.weights.assign(channels * channels, 0.0f);
  for (std::size_t i = 0; i < channels; ++i) c.weights[i * channels + i] = 1.0f;
  c.bias.assign(channels, 0.0f);
  return c;
}

NetworkSpec two_level_unet(Rng& rng) {
  NetworkSpec net;
  net.input_channels = 1;
  net.output_channels = 2;
  net.layers = {
      {"enc", wmh::testing::random_conv(rng, 4, 1, {3, 3, 3}, {1, 1, 1}, {1, 1, 1})},
      {"enc_relu", ReLU{}},
      {"pool", MaxPool{}},
      {"mid", wmh::testing::random_conv(rng, 6, 4, {3, 3, 3}, {1, 1, 1}, {1, 1, 1})},
      {"mid_relu", ReLU{}},
      {"up", UpsampleNearest{}},
      {"skip", Concat{"enc_relu"}},
      {"head", wmh::testing::random_conv(rng, 2, 10, {1, 1, 1}, {1, 1, 1}, {0, 0, 0})},
      {"posterior", Softmax{}},
  };
  return net;
}

}  // namespace

TEST(Conv3d, UnitKernelIsIdentity) {
  Rng rng(1);
  const Tensor4 x = wmh::testing::random_tensor(rng, {1, 3, 4, 5});
  const Tensor4 y = conv3d(x, pointwise_identity(1));
  EXPECT_EQ(y.shape(), x.shape());
  for (std::size_t i = 0; i < x.data().size(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
}

TEST(Conv3d, ConstantFieldSum) {
  Conv3D c;
  c.kernel_shape = {1, 1, 3, 3, 3};
  c.weights.assign(27, 1.0f);
  c.bias = {0.0f};
  c.padding = {1, 1, 1};
  const Tensor4 y = conv3d(Tensor4({1, 5, 5, 5}, 7.0f), c);
  EXPECT_EQ(y.at(0, 2, 2, 2), 189.0f);
  EXPECT_EQ(y.at(0, 0, 0, 0), 56.0f);  // corner sees 2x2x2 in-bounds taps
}

TEST(Conv3d, StridedPaddedMatchesNaiveOracle) {
  Rng rng(2);
  const Tensor4 x = wmh::testing::random_tensor(rng, {2, 6, 6, 6});
  const Conv3D c = wmh::testing::random_conv(rng, 3, 2, {3, 3, 3}, {2, 2, 2}, {1, 1, 1});
  const Tensor4 y = conv3d(x, c);
  const auto ref = oracle::naive_conv3d(x, c);
  ASSERT_EQ(y.shape(), (Shape4{3, 3, 3, 3}));
  for (std::size_t i = 0; i < ref.values.size(); ++i)
    EXPECT_LE(std::fabs(y.data()[i] - ref.values[i]), 1e-5 * std::max(1.0, std::fabs(ref.values[i])));
}

TEST(Conv3d, RejectsChannelMismatch) {
  Rng rng(3);
  const Conv3D c = wmh::testing::random_conv(rng, 2, 3, {1, 1, 1}, {1, 1, 1}, {0, 0, 0});
  EXPECT_EQ(code_of([&] { conv3d(Tensor4({2, 2, 2, 2}), c); }), ErrorCode::ShapeMismatch);
  const Conv3D big = wmh::testing::random_conv(rng, 1, 1, {3, 3, 3}, {1, 1, 1}, {0, 0, 0});
  EXPECT_EQ(code_of([&] { conv3d(Tensor4({1, 2, 2, 2}), big); }), ErrorCode::ShapeMismatch);
}

TEST(Layers, BatchNormIdentity) {
  Rng rng(4);
  const Tensor4 x = wmh::testing::random_tensor(rng, {2, 2, 3, 2});
  BatchNorm bn{{1, 1}, {0, 0}, {0, 0}, {1, 1}, 0.0f};
  const Tensor4 y = apply_layer(x, bn, {});
  for (std::size_t i = 0; i < x.data().size(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
}

TEST(Layers, BatchNormFormula) {
  Tensor4 x({1, 1, 1, 2}, std::vector<float>{1.0f, 5.0f});
  BatchNorm bn{{2}, {0.5f}, {3}, {4}, 0.0f};
  const Tensor4 y = apply_layer(x, bn, {});
  EXPECT_FLOAT_EQ(y.data()[0], 2.0f * (1 - 3) / 2 + 0.5f);
  EXPECT_FLOAT_EQ(y.data()[1], 2.0f * (5 - 3) / 2 + 0.5f);
  BatchNorm bad{{1}, {0}, {0}, {-1}, 0.0f};
  EXPECT_EQ(code_of([&] { apply_layer(x, bad, {}); }), ErrorCode::ShapeMismatch);
}

TEST(Layers, ReluClampsNegatives) {
  Tensor4 x({1, 1, 1, 3}, std::vector<float>{-2.0f, 0.0f, 3.0f});
  const Tensor4 y = apply_layer(x, ReLU{}, {});
  EXPECT_EQ(y.data()[0], 0.0f);
  EXPECT_EQ(y.data()[1], 0.0f);
  EXPECT_EQ(y.data()[2], 3.0f);
}

TEST(Layers, SoftmaxOfEqualLogitsIsHalf) {
  const Tensor4 y = apply_layer(Tensor4({2, 2, 2, 2}, 0.0f), Softmax{}, {});
  for (float v : y.data()) EXPECT_EQ(v, 0.5f);
}

TEST(Layers, SoftmaxSumsToOne) {
  Rng rng(5);
  Tensor4 x = wmh::testing::random_tensor(rng, {3, 4, 4, 4});
  for (float& v : x.data()) v *= 30.0f;
  const Tensor4 y = apply_layer(x, Softmax{}, {});
  for (std::size_t i = 0; i < y.shape().spatial(); ++i) {
    double s = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      const float p = y.channel(c)[i];
      EXPECT_GE(p, 0.0f);
      EXPECT_LE(p, 1.0f);
      s += p;
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Layers, MaxPoolPicksLargest) {
  Tensor4 x({1, 2, 2, 2}, std::vector<float>{1, 2, 3, 4, 5, 6, 7, 8});
  const Tensor4 y = apply_layer(x, MaxPool{}, {});
  ASSERT_EQ(y.shape(), (Shape4{1, 1, 1, 1}));
  EXPECT_EQ(y.data()[0], 8.0f);
}

TEST(Layers, UpsampleRepeatsVoxels) {
  Tensor4 x({1, 1, 1, 2}, std::vector<float>{1, 2});
  const Tensor4 y = apply_layer(x, UpsampleNearest{{2, 1, 3}}, {});
  ASSERT_EQ(y.shape(), (Shape4{1, 2, 1, 6}));
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t w = 0; w < 6; ++w) EXPECT_EQ(y.at(0, z, 0, w), w < 3 ? 1.0f : 2.0f);
}

TEST(Layers, ConcatAppendsSourceChannels) {
  Bindings b;
  b.emplace("skip", Tensor4({2, 1, 1, 1}, std::vector<float>{7, 8}));
  const Tensor4 y = apply_layer(Tensor4({1, 1, 1, 1}, 3.0f), Concat{"skip"}, b);
  ASSERT_EQ(y.shape().c, 3u);
  EXPECT_EQ(y.data()[0], 3.0f);
  EXPECT_EQ(y.data()[1], 7.0f);
  EXPECT_EQ(y.data()[2], 8.0f);
  EXPECT_EQ(code_of([&] { apply_layer(Tensor4({1, 1, 1, 1}), Concat{"nope"}, b); }), ErrorCode::UnknownConcatSource);
  EXPECT_EQ(code_of([&] { apply_layer(Tensor4({1, 1, 1, 2}), Concat{"skip"}, b); }), ErrorCode::ShapeMismatch);
}

TEST(Forward, EmptyNetworkIsIdentity) {
  Rng rng(6);
  const Tensor4 x = wmh::testing::random_tensor(rng, {1, 2, 3, 4});
  const Tensor4 y = forward(NetworkSpec{}, x);
  for (std::size_t i = 0; i < x.data().size(); ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
}

TEST(Forward, IdentityConvThenSoftmax) {
  Tensor4 x({2, 1, 1, 3}, std::vector<float>{0.0f, 1.0f, -2.0f, 0.5f, 1.0f, 3.0f});
  NetworkSpec net;
  net.input_channels = net.output_channels = 2;
  net.layers = {{"id", pointwise_identity(2)}, {"sm", Softmax{}}};
  const Tensor4 y = forward(net, x);
  for (std::size_t i = 0; i < 3; ++i) {
    const double a = x.at(0, 0, 0, i), b = x.at(1, 0, 0, i);
    EXPECT_NEAR(y.at(0, 0, 0, i), std::exp(a) / (std::exp(a) + std::exp(b)), 1e-7);
    EXPECT_NEAR(y.at(1, 0, 0, i), std::exp(b) / (std::exp(a) + std::exp(b)), 1e-7);
  }
}

TEST(Forward, UnetEqualsLayerByLayerComposition) {
  Rng rng(7);
  const NetworkSpec net = two_level_unet(rng);
  check_network(net);
  const Tensor4 x = wmh::testing::random_tensor(rng, {1, 8, 8, 8});
  const Tensor4 y = forward(net, x);

  Bindings b;
  Tensor4 t = x;
  for (const auto& layer : net.layers) {
    t = apply_layer(t, layer.spec, b);
    b.insert_or_assign(layer.name, t);
  }
  ASSERT_EQ(y.shape(), (Shape4{2, 8, 8, 8}));
  for (std::size_t i = 0; i < t.data().size(); ++i) EXPECT_NEAR(y.data()[i], t.data()[i], 1e-5);
}

TEST(Forward, UnetMatchesHandWrittenOracle) {
  Rng rng(8);
  const NetworkSpec net = two_level_unet(rng);
  const Tensor4 x = wmh::testing::random_tensor(rng, {1, 8, 8, 8});
  const Tensor4 y = forward(net, x);

  auto to_tensor = [](const oracle::ConvResult& r) {
    Tensor4 t({r.shape[0], r.shape[1], r.shape[2], r.shape[3]});
    for (std::size_t i = 0; i < r.values.size(); ++i) t.data()[i] = static_cast<float>(std::max(0.0, r.values[i]));
    return t;
  };
  const Tensor4 enc = to_tensor(oracle::naive_conv3d(x, std::get<Conv3D>(net.layers[0].spec)));
  Tensor4 pooled({4, 4, 4, 4}, -1e30f);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t z = 0; z < 8; ++z)
      for (std::size_t yy = 0; yy < 8; ++yy)
        for (std::size_t xx = 0; xx < 8; ++xx)
          pooled.at(c, z / 2, yy / 2, xx / 2) = std::max(pooled.at(c, z / 2, yy / 2, xx / 2), enc.at(c, z, yy, xx));
  const Tensor4 mid = to_tensor(oracle::naive_conv3d(pooled, std::get<Conv3D>(net.layers[3].spec)));
  Tensor4 cat({10, 8, 8, 8});
  for (std::size_t z = 0; z < 8; ++z)
    for (std::size_t yy = 0; yy < 8; ++yy)
      for (std::size_t xx = 0; xx < 8; ++xx) {
        for (std::size_t c = 0; c < 6; ++c) cat.at(c, z, yy, xx) = mid.at(c, z / 2, yy / 2, xx / 2);
        for (std::size_t c = 0; c < 4; ++c) cat.at(6 + c, z, yy, xx) = enc.at(c, z, yy, xx);
      }
  const auto head = oracle::naive_conv3d(cat, std::get<Conv3D>(net.layers[7].spec));
  const std::size_t n = 512;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = head.values[i], b = head.values[n + i];
    const double p1 = 1.0 / (1.0 + std::exp(a - b));
    EXPECT_NEAR(y.data()[n + i], p1, 1e-5);
    EXPECT_NEAR(y.data()[i], 1.0 - p1, 1e-5);
  }
}

TEST(Forward, DeterministicAcrossRuns) {
  Rng rng(9);
  const NetworkSpec net = two_level_unet(rng);
  const Tensor4 x = wmh::testing::random_tensor(rng, {1, 8, 8, 8});
  const Tensor4 a = forward(net, x), b = forward(net, x);
  EXPECT_EQ(0, std::memcmp(a.data().data(), b.data().data(), a.data().size() * sizeof(float)));
}

TEST(ShapeCheck, AcceptsExactlyWhatForwardAccepts) {
  Rng rng(10);
  for (int rep = 0; rep < 60; ++rep) {
    NetworkSpec net;
    std::size_t channels = 1 + wmh::testing::uniform_int(rng, 0, 1);
    net.input_channels = channels;
    const std::size_t depth = wmh::testing::uniform_int(rng, 1, 4);
    for (std::size_t l = 0; l < depth; ++l) {
      const std::string name = "l" + std::to_string(l);
      switch (wmh::testing::uniform_int(rng, 0, 3)) {
        case 0: {
          // Occasionally wire a wrong input channel count.
          const std::size_t cin = wmh::testing::uniform_int(rng, 0, 5) == 0 ? channels + 1 : channels;
          const std::size_t cout = wmh::testing::uniform_int(rng, 1, 3);
          const std::size_t k = wmh::testing::uniform_int(rng, 1, 3);
          net.layers.push_back({name, wmh::testing::random_conv(rng, cout, cin, {k, k, k}, {1, 1, 1}, {0, 0, 0})});
          channels = cout;
          break;
        }
        case 1: net.layers.push_back({name, MaxPool{}}); break;
        case 2: net.layers.push_back({name, UpsampleNearest{}}); break;
        default: net.layers.push_back({name, ReLU{}}); break;
      }
    }
    const std::size_t s = wmh::testing::uniform_int(rng, 1, 6);
    const Shape4 in{net.input_channels, s, s + 1, s};
    const bool static_ok = try_infer_shape(net, in).has_value();
    bool runtime_ok = true;
    try {
      forward(net, wmh::testing::random_tensor(rng, in));
    } catch (const Error&) {
      runtime_ok = false;
    }
    EXPECT_EQ(static_ok, runtime_ok) << "rep " << rep;
  }
}

TEST(ShapeCheck, NetworkLevelErrors) {
  Rng rng(11);
  NetworkSpec bad;
  bad.input_channels = 1;
  bad.output_channels = 2;
  bad.layers = {{"a", wmh::testing::random_conv(rng, 2, 3, {1, 1, 1}, {1, 1, 1}, {0, 0, 0})}};
  EXPECT_EQ(code_of([&] { check_network(bad); }), ErrorCode::ShapeCheckFailed);

  NetworkSpec wrong_out;
  wrong_out.input_channels = 1;
  wrong_out.output_channels = 3;
  wrong_out.layers = {{"a", wmh::testing::random_conv(rng, 2, 1, {1, 1, 1}, {1, 1, 1}, {0, 0, 0})}};
  EXPECT_EQ(code_of([&] { check_network(wrong_out); }), ErrorCode::ShapeCheckFailed);

  NetworkSpec dup;
  dup.input_channels = dup.output_channels = 1;
  dup.layers = {{"a", ReLU{}}, {"a", ReLU{}}};
  EXPECT_EQ(code_of([&] { check_network(dup); }), ErrorCode::ShapeCheckFailed);

  NetworkSpec concat_input;
  concat_input.input_channels = 1;
  concat_input.output_channels = 2;
  concat_input.layers = {{"c", Concat{std::string(kInputBinding)}}};
  EXPECT_NO_THROW(check_network(concat_input));
}

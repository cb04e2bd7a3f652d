#pragma once

// Inference-only 3D CNN engine: layer vocabulary, static shape inference and forward pass.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wmh/tensor.hpp"

namespace wmh {

/// (depth, height, width) triple.
using Triple = std::array<std::size_t, 3>;

struct Conv3D {
  /// (Cout, Cin, kd, kh, kw)
  std::array<std::size_t, 5> kernel_shape{1, 1, 1, 1, 1};
  std::vector<float> weights;
  std::vector<float> bias;
  Triple stride{1, 1, 1};
  Triple padding{0, 0, 0};

  std::size_t out_channels() const noexcept { return kernel_shape[0]; }
  std::size_t in_channels() const noexcept { return kernel_shape[1]; }
  float weight(std::size_t co, std::size_t ci, std::size_t kz, std::size_t ky, std::size_t kx) const noexcept {
    const auto& k = kernel_shape;
    return weights[(((co * k[1] + ci) * k[2] + kz) * k[3] + ky) * k[4] + kx];
  }
};

/// Inference-mode batch normalization with stored statistics.
struct BatchNorm {
  std::vector<float> gamma, beta, mean, var;
  float eps = 1e-5f;
};

struct ReLU {};

struct MaxPool {
  Triple kernel{2, 2, 2};
  Triple stride{2, 2, 2};
};

struct UpsampleNearest {
  Triple factor{2, 2, 2};
};

/// Appends the channels of an earlier named output after the current tensor's channels.
struct Concat {
  std::string source;
};

/// Per-voxel softmax over channels.
struct Softmax {};

using LayerSpec = std::variant<Conv3D, BatchNorm, ReLU, MaxPool, UpsampleNearest, Concat, Softmax>;

std::string_view layer_type_name(const LayerSpec& layer) noexcept;

struct Layer {
  std::string name;
  LayerSpec spec;
};

/// Name under which the network input is visible to Concat layers.
inline constexpr std::string_view kInputBinding = "input";

struct NetworkSpec {
  std::vector<Layer> layers;
  std::size_t input_channels = 1;
  std::size_t output_channels = 1;
  /// Optional role tag ("axial", "sagittal", "coronal", "meta").
  std::string role;
};

using Bindings = std::map<std::string, Tensor4, std::less<>>;
using ShapeBindings = std::map<std::string, Shape4, std::less<>>;

/// Zero-padded cross-correlation. Accumulates in double in (cin, kd, kh, kw) order per output voxel.
Tensor4 conv3d(const Tensor4& x, const Conv3D& p);

/// Output shape of one layer, or ShapeMismatch / UnknownConcatSource.
Shape4 infer_layer_shape(const Shape4& in, const LayerSpec& layer, const ShapeBindings& bindings);

Tensor4 apply_layer(const Tensor4& x, const LayerSpec& layer, const Bindings& bindings);

/// Static dry run over shapes. Succeeds exactly when forward() succeeds on an input of `input`.
Shape4 infer_shape(const NetworkSpec& net, const Shape4& input);
/// Like infer_shape but returns std::nullopt instead of throwing.
std::optional<Shape4> try_infer_shape(const NetworkSpec& net, const Shape4& input) noexcept;

/// Spatial-size-independent validation: channel flow, parameter sizes, declared channel counts,
/// concat sources. Throws ShapeCheckFailed.
void check_network(const NetworkSpec& net);

Tensor4 forward(const NetworkSpec& net, const Tensor4& x);

}  // namespace wmh

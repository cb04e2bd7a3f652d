#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "wmh/error.hpp"
#include "wmh/network.hpp"

namespace wmh {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void shape_error(const std::string& msg) { fail(ErrorCode::ShapeMismatch, msg); }

std::size_t conv_out(std::size_t n, std::size_t k, std::size_t s, std::size_t p, const char* axis) {
  const std::size_t padded = n + 2 * p;
  if (padded < k)
    shape_error(std::string("conv3d kernel larger than padded input along ") + axis);
  return (padded - k) / s + 1;
}

// Runs fn(i) for i in [0, n). Each index writes disjoint output, so the split does not
// change any per-element reduction order.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t work_per_item, Fn&& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t threads = std::min<std::size_t>(hw, n);
  if (threads <= 1 || n * work_per_item < (std::size_t{1} << 20)) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
}

// Output index range [lo, hi) for which o*s + k - p lands in [0, n).
std::pair<std::size_t, std::size_t> valid_range(std::size_t out, std::size_t n, std::size_t s, std::size_t k,
                                                std::size_t p) {
  // need o*s + k >= p  and  o*s + k - p <= n - 1
  std::size_t lo = 0;
  if (k < p) lo = (p - k + s - 1) / s;
  std::size_t hi = 0;
  if (n + p > k) hi = std::min(out, (n - 1 + p - k) / s + 1);
  if (hi < lo) hi = lo;
  return {lo, hi};
}

}  // namespace

std::string_view layer_type_name(const LayerSpec& layer) noexcept {
  return std::visit(overloaded{
                        [](const Conv3D&) -> std::string_view { return "conv3d"; },
                        [](const BatchNorm&) -> std::string_view { return "batchnorm"; },
                        [](const ReLU&) -> std::string_view { return "relu"; },
                        [](const MaxPool&) -> std::string_view { return "maxpool"; },
                        [](const UpsampleNearest&) -> std::string_view { return "upsample"; },
                        [](const Concat&) -> std::string_view { return "concat"; },
                        [](const Softmax&) -> std::string_view { return "softmax"; },
                    },
                    layer);
}

Shape4 infer_layer_shape(const Shape4& in, const LayerSpec& layer, const ShapeBindings& bindings) {
  return std::visit(
      overloaded{
          [&](const Conv3D& p) {
            const auto& k = p.kernel_shape;
            if (std::any_of(k.begin(), k.end(), [](std::size_t v) { return v == 0; }))
              shape_error("conv3d kernel dims must be >= 1");
            if (p.weights.size() != k[0] * k[1] * k[2] * k[3] * k[4]) shape_error("conv3d weight count mismatch");
            if (p.bias.size() != k[0]) shape_error("conv3d bias length != Cout");
            if (std::any_of(p.stride.begin(), p.stride.end(), [](std::size_t v) { return v == 0; }))
              shape_error("conv3d stride must be >= 1");
            if (in.c != k[1])
              shape_error("conv3d expects " + std::to_string(k[1]) + " input channels, got " + std::to_string(in.c));
            return Shape4{k[0], conv_out(in.d, k[2], p.stride[0], p.padding[0], "depth"),
                          conv_out(in.h, k[3], p.stride[1], p.padding[1], "height"),
                          conv_out(in.w, k[4], p.stride[2], p.padding[2], "width")};
          },
          [&](const BatchNorm& p) {
            if (p.gamma.size() != in.c || p.beta.size() != in.c || p.mean.size() != in.c || p.var.size() != in.c)
              shape_error("batchnorm parameter length != channels");
            if (!(p.eps >= 0.0f)) shape_error("batchnorm eps must be >= 0");
            for (float v : p.var)
              if (!(v >= 0.0f) || !(static_cast<double>(v) + p.eps > 0.0))
                shape_error("batchnorm variance must be >= 0 with var + eps > 0");
            return in;
          },
          [&](const ReLU&) { return in; },
          [&](const MaxPool& p) {
            for (int i = 0; i < 3; ++i)
              if (p.kernel[i] == 0 || p.stride[i] == 0) shape_error("maxpool kernel/stride must be >= 1");
            if (in.d < p.kernel[0] || in.h < p.kernel[1] || in.w < p.kernel[2])
              shape_error("maxpool kernel larger than input " + in.str());
            return Shape4{in.c, (in.d - p.kernel[0]) / p.stride[0] + 1, (in.h - p.kernel[1]) / p.stride[1] + 1,
                          (in.w - p.kernel[2]) / p.stride[2] + 1};
          },
          [&](const UpsampleNearest& p) {
            for (auto f : p.factor)
              if (f == 0) shape_error("upsample factor must be >= 1");
            return Shape4{in.c, in.d * p.factor[0], in.h * p.factor[1], in.w * p.factor[2]};
          },
          [&](const Concat& p) {
            const auto it = bindings.find(p.source);
            if (it == bindings.end()) fail(ErrorCode::UnknownConcatSource, "no earlier output named '" + p.source + "'");
            const Shape4& s = it->second;
            if (s.d != in.d || s.h != in.h || s.w != in.w)
              shape_error("concat source '" + p.source + "' " + s.str() + " spatially differs from " + in.str());
            return Shape4{in.c + s.c, in.d, in.h, in.w};
          },
          [&](const Softmax&) { return in; },
      },
      layer);
}

Tensor4 conv3d(const Tensor4& x, const Conv3D& p) {
  const Shape4 os = infer_layer_shape(x.shape(), p, {});
  const Shape4& is = x.shape();
  const auto& k = p.kernel_shape;
  Tensor4 out(os);
  const std::size_t ospatial = os.spatial();

  parallel_for(os.c, ospatial * is.c * k[2] * k[3] * k[4], [&](std::size_t co) {
    std::vector<double> acc(ospatial, static_cast<double>(p.bias[co]));
    for (std::size_t ci = 0; ci < is.c; ++ci) {
      const float* src = x.channel(ci).data();
      for (std::size_t kz = 0; kz < k[2]; ++kz) {
        const auto [z0, z1] = valid_range(os.d, is.d, p.stride[0], kz, p.padding[0]);
        for (std::size_t ky = 0; ky < k[3]; ++ky) {
          const auto [y0, y1] = valid_range(os.h, is.h, p.stride[1], ky, p.padding[1]);
          for (std::size_t kx = 0; kx < k[4]; ++kx) {
            const auto [x0, x1] = valid_range(os.w, is.w, p.stride[2], kx, p.padding[2]);
            const double w = p.weight(co, ci, kz, ky, kx);
            if (x0 >= x1) continue;
            for (std::size_t oz = z0; oz < z1; ++oz) {
              const std::size_t iz = oz * p.stride[0] + kz - p.padding[0];
              for (std::size_t oy = y0; oy < y1; ++oy) {
                const std::size_t iy = oy * p.stride[1] + ky - p.padding[1];
                const float* row = src + (iz * is.h + iy) * is.w;
                double* dst = acc.data() + (oz * os.h + oy) * os.w;
                std::size_t ix = x0 * p.stride[2] + kx - p.padding[2];
                for (std::size_t ox = x0; ox < x1; ++ox, ix += p.stride[2]) dst[ox] += w * row[ix];
              }
            }
          }
        }
      }
    }
    float* o = out.channel(co).data();
    for (std::size_t i = 0; i < ospatial; ++i) o[i] = static_cast<float>(acc[i]);
  });
  return out;
}

Tensor4 apply_layer(const Tensor4& x, const LayerSpec& layer, const Bindings& bindings) {
  ShapeBindings shapes;
  if (const auto* cat = std::get_if<Concat>(&layer)) {
    if (auto it = bindings.find(cat->source); it != bindings.end()) shapes.emplace(it->first, it->second.shape());
  }
  const Shape4 os = infer_layer_shape(x.shape(), layer, shapes);
  const Shape4& is = x.shape();

  return std::visit(
      overloaded{
          [&](const Conv3D& p) { return conv3d(x, p); },
          [&](const BatchNorm& p) {
            Tensor4 out(os);
            for (std::size_t c = 0; c < is.c; ++c) {
              const double scale = p.gamma[c] / std::sqrt(static_cast<double>(p.var[c]) + p.eps);
              const double mean = p.mean[c], beta = p.beta[c];
              const auto src = x.channel(c);
              auto dst = out.channel(c);
              for (std::size_t i = 0; i < src.size(); ++i)
                dst[i] = static_cast<float>(scale * (src[i] - mean) + beta);
            }
            return out;
          },
          [&](const ReLU&) {
            Tensor4 out(os);
            std::transform(x.data().begin(), x.data().end(), out.data().begin(),
                           [](float v) { return v > 0.0f ? v : 0.0f; });
            return out;
          },
          [&](const MaxPool& p) {
            Tensor4 out(os);
            for (std::size_t c = 0; c < os.c; ++c)
              for (std::size_t z = 0; z < os.d; ++z)
                for (std::size_t y = 0; y < os.h; ++y)
                  for (std::size_t xx = 0; xx < os.w; ++xx) {
                    float m = -std::numeric_limits<float>::infinity();
                    for (std::size_t kz = 0; kz < p.kernel[0]; ++kz)
                      for (std::size_t ky = 0; ky < p.kernel[1]; ++ky)
                        for (std::size_t kx = 0; kx < p.kernel[2]; ++kx)
                          m = std::max(m, x.at(c, z * p.stride[0] + kz, y * p.stride[1] + ky, xx * p.stride[2] + kx));
                    out.at(c, z, y, xx) = m;
                  }
            return out;
          },
          [&](const UpsampleNearest& p) {
            Tensor4 out(os);
            for (std::size_t c = 0; c < os.c; ++c)
              for (std::size_t z = 0; z < os.d; ++z)
                for (std::size_t y = 0; y < os.h; ++y)
                  for (std::size_t xx = 0; xx < os.w; ++xx)
                    out.at(c, z, y, xx) = x.at(c, z / p.factor[0], y / p.factor[1], xx / p.factor[2]);
            return out;
          },
          [&](const Concat& p) {
            const Tensor4& src = bindings.find(p.source)->second;
            Tensor4 out(os);
            std::copy(x.data().begin(), x.data().end(), out.data().begin());
            std::copy(src.data().begin(), src.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(x.data().size()));
            return out;
          },
          [&](const Softmax&) {
            Tensor4 out(os);
            const std::size_t n = is.spatial();
            std::vector<double> e(is.c);
            for (std::size_t i = 0; i < n; ++i) {
              double m = -std::numeric_limits<double>::infinity();
              for (std::size_t c = 0; c < is.c; ++c) m = std::max(m, static_cast<double>(x.data()[c * n + i]));
              double sum = 0.0;
              for (std::size_t c = 0; c < is.c; ++c) {
                e[c] = std::exp(static_cast<double>(x.data()[c * n + i]) - m);
                sum += e[c];
              }
              for (std::size_t c = 0; c < is.c; ++c) out.data()[c * n + i] = static_cast<float>(e[c] / sum);
            }
            return out;
          },
      },
      layer);
}

}  // namespace wmh

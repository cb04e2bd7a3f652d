#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wmh/volume.hpp"

namespace wmh {

/// Channel-first activation shape (C, D, H, W).
struct Shape4 {
  std::size_t c = 1, d = 1, h = 1, w = 1;

  std::size_t spatial() const noexcept { return d * h * w; }
  std::size_t count() const noexcept { return c * spatial(); }
  std::string str() const;

  friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense float tensor, W fastest.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape4 shape, float fill = 0.0f);
  Tensor4(Shape4 shape, std::vector<float> data);

  const Shape4& shape() const noexcept { return shape_; }
  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  std::span<float> channel(std::size_t c) noexcept { return std::span<float>(data_).subspan(c * shape_.spatial(), shape_.spatial()); }
  std::span<const float> channel(std::size_t c) const noexcept {
    return std::span<const float>(data_).subspan(c * shape_.spatial(), shape_.spatial());
  }

  std::size_t index(std::size_t c, std::size_t z, std::size_t y, std::size_t x) const noexcept {
    return ((c * shape_.d + z) * shape_.h + y) * shape_.w + x;
  }
  float& at(std::size_t c, std::size_t z, std::size_t y, std::size_t x) noexcept { return data_[index(c, z, y, x)]; }
  float at(std::size_t c, std::size_t z, std::size_t y, std::size_t x) const noexcept {
    return data_[index(c, z, y, x)];
  }

 private:
  Shape4 shape_{};
  std::vector<float> data_ = std::vector<float>(1, 0.0f);
};

/// Volume (x, y, z) -> single channel tensor with W = x, H = y, D = z. Same memory order.
Tensor4 tensor_from_volume(const Volume3D& v);
/// Stacks equally shaped volumes as channels.
Tensor4 tensor_from_volumes(std::span<const Volume3D> volumes);
/// Extracts one channel into a volume with `geometry`'s spacing and orientation.
Volume3D volume_from_channel(const Tensor4& t, std::size_t channel, const Volume3D& geometry);

}  // namespace wmh

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wmh {

/// Anatomical direction toward which a voxel index increases.
enum class AxisCode : std::uint8_t { R, L, A, P, S, I };

/// World axis (0 = left/right, 1 = posterior/anterior, 2 = inferior/superior).
constexpr int world_axis(AxisCode c) noexcept { return static_cast<int>(c) / 2; }
/// +1 when the index runs toward R, A or S.
constexpr int axis_sign(AxisCode c) noexcept { return (static_cast<int>(c) % 2 == 0) ? 1 : -1; }
constexpr AxisCode make_axis(int world, int sign) noexcept {
  return static_cast<AxisCode>(world * 2 + (sign > 0 ? 0 : 1));
}
char axis_letter(AxisCode c) noexcept;

struct Orientation {
  std::array<AxisCode, 3> axes{AxisCode::R, AxisCode::A, AxisCode::S};

  static constexpr Orientation ras() noexcept { return {}; }
  /// Parses a three letter code such as "LPS".
  static Orientation parse(std::string_view code);

  /// True when the three axes name distinct world axes.
  bool valid() const noexcept;
  bool is_ras() const noexcept { return *this == ras(); }
  std::string str() const;

  /// All 48 signed axis permutations.
  static std::vector<Orientation> all();

  friend bool operator==(const Orientation&, const Orientation&) = default;
};

using Dims = std::array<std::size_t, 3>;
using Spacing = std::array<double, 3>;

/// Dense 3D scalar field, x fastest. Holds intensities, posteriors, masks and label maps.
class Volume3D {
 public:
  Volume3D() = default;
  Volume3D(Dims dims, Spacing spacing = {1.0, 1.0, 1.0}, Orientation orientation = Orientation::ras(),
           float fill = 0.0f);
  Volume3D(Dims dims, Spacing spacing, Orientation orientation, std::vector<float> data);

  const Dims& dims() const noexcept { return dims_; }
  const Spacing& spacing() const noexcept { return spacing_; }
  const Orientation& orientation() const noexcept { return orientation_; }

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  std::vector<float>& storage() noexcept { return data_; }

  std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return x + dims_[0] * (y + dims_[1] * z);
  }
  float& at(std::size_t x, std::size_t y, std::size_t z) noexcept { return data_[index(x, y, z)]; }
  float at(std::size_t x, std::size_t y, std::size_t z) const noexcept { return data_[index(x, y, z)]; }
  float& operator[](std::size_t i) noexcept { return data_[i]; }
  float operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Voxel volume in mm^3.
  double voxel_volume() const noexcept { return spacing_[0] * spacing_[1] * spacing_[2]; }

  /// Same dims, orientation and spacing (spacing within 1e-6 mm).
  bool same_grid(const Volume3D& other) const noexcept;

  /// Copy of this volume's geometry with every voxel set to `fill`.
  Volume3D like(float fill = 0.0f) const { return Volume3D(dims_, spacing_, orientation_, fill); }

 private:
  void validate() const;

  Dims dims_{0, 0, 0};
  Spacing spacing_{1.0, 1.0, 1.0};
  Orientation orientation_{};
  std::vector<float> data_;
};

/// True if every voxel is exactly 0 or 1.
bool is_binary(const Volume3D& v) noexcept;
/// Throws NonBinaryInput unless is_binary(v).
void require_binary(const Volume3D& v, std::string_view what);
/// Number of voxels equal to 1 in a binary volume.
std::size_t count_foreground(const Volume3D& v) noexcept;

}  // namespace wmh

#include "wmh/volume.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "wmh/error.hpp"

namespace wmh {

char axis_letter(AxisCode c) noexcept {
  static constexpr char letters[] = {'R', 'L', 'A', 'P', 'S', 'I'};
  return letters[static_cast<int>(c)];
}

Orientation Orientation::parse(std::string_view code) {
  if (code.size() != 3) fail(ErrorCode::InvalidArgument, "orientation code must have 3 letters");
  Orientation o;
  for (std::size_t i = 0; i < 3; ++i) {
    switch (std::toupper(static_cast<unsigned char>(code[i]))) {
      case 'R': o.axes[i] = AxisCode::R; break;
      case 'L': o.axes[i] = AxisCode::L; break;
      case 'A': o.axes[i] = AxisCode::A; break;
      case 'P': o.axes[i] = AxisCode::P; break;
      case 'S': o.axes[i] = AxisCode::S; break;
      case 'I': o.axes[i] = AxisCode::I; break;
      default: fail(ErrorCode::InvalidArgument, "bad orientation letter in '" + std::string(code) + "'");
    }
  }
  if (!o.valid()) fail(ErrorCode::InvalidArgument, "orientation '" + std::string(code) + "' repeats an axis");
  return o;
}

bool Orientation::valid() const noexcept {
  const int a = world_axis(axes[0]), b = world_axis(axes[1]), c = world_axis(axes[2]);
  return a != b && b != c && a != c;
}

std::string Orientation::str() const {
  return {axis_letter(axes[0]), axis_letter(axes[1]), axis_letter(axes[2])};
}

std::vector<Orientation> Orientation::all() {
  std::vector<Orientation> out;
  std::array<int, 3> perm{0, 1, 2};
  do {
    for (int signs = 0; signs < 8; ++signs) {
      Orientation o;
      for (int i = 0; i < 3; ++i) o.axes[i] = make_axis(perm[i], (signs >> i) & 1 ? -1 : 1);
      out.push_back(o);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

Volume3D::Volume3D(Dims dims, Spacing spacing, Orientation orientation, float fill)
    : dims_(dims), spacing_(spacing), orientation_(orientation) {
  validate();
  data_.assign(dims_[0] * dims_[1] * dims_[2], fill);
}

Volume3D::Volume3D(Dims dims, Spacing spacing, Orientation orientation, std::vector<float> data)
    : dims_(dims), spacing_(spacing), orientation_(orientation), data_(std::move(data)) {
  validate();
  if (data_.size() != dims_[0] * dims_[1] * dims_[2])
    fail(ErrorCode::InvalidVolume, "data length does not match dims");
}

void Volume3D::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (dims_[i] == 0) fail(ErrorCode::InvalidVolume, "dims must be positive");
    if (!(spacing_[i] > 0.0) || !std::isfinite(spacing_[i]))
      fail(ErrorCode::InvalidVolume, "spacing must be positive and finite");
  }
  if (!orientation_.valid()) fail(ErrorCode::InvalidVolume, "orientation repeats an axis");
}

bool Volume3D::same_grid(const Volume3D& other) const noexcept {
  if (dims_ != other.dims_ || orientation_ != other.orientation_) return false;
  for (int i = 0; i < 3; ++i)
    if (std::abs(spacing_[i] - other.spacing_[i]) > 1e-6) return false;
  return true;
}

bool is_binary(const Volume3D& v) noexcept {
  return std::all_of(v.data().begin(), v.data().end(), [](float x) { return x == 0.0f || x == 1.0f; });
}

void require_binary(const Volume3D& v, std::string_view what) {
  if (!is_binary(v)) fail(ErrorCode::NonBinaryInput, std::string(what) + " is not a binary mask");
}

std::size_t count_foreground(const Volume3D& v) noexcept {
  return static_cast<std::size_t>(std::count(v.data().begin(), v.data().end(), 1.0f));
}

}  // namespace wmh

#include "wmh/reformat.hpp"

#include <cstdint>

#include "wmh/error.hpp"

namespace wmh {

std::string_view to_string(Plane p) noexcept {
  switch (p) {
    case Plane::Axial: return "axial";
    case Plane::Sagittal: return "sagittal";
    case Plane::Coronal: return "coronal";
  }
  return "?";
}

SignedPermutation::Matrix SignedPermutation::matrix() const noexcept {
  Matrix m{};
  for (int k = 0; k < 3; ++k) m[k][source[k]] = sign[k];
  return m;
}

SignedPermutation SignedPermutation::inverse() const noexcept {
  SignedPermutation inv;
  for (int k = 0; k < 3; ++k) {
    inv.source[source[k]] = k;
    inv.sign[source[k]] = sign[k];
  }
  return inv;
}

SignedPermutation SignedPermutation::after(const SignedPermutation& first) const noexcept {
  SignedPermutation out;
  for (int k = 0; k < 3; ++k) {
    out.source[k] = first.source[source[k]];
    out.sign[k] = sign[k] * first.sign[source[k]];
  }
  return out;
}

bool SignedPermutation::is_identity() const noexcept { return *this == SignedPermutation{}; }

SignedPermutation plane_permutation(Plane p) noexcept {
  switch (p) {
    case Plane::Axial: return {{0, 1, 2}, {1, 1, 1}};
    case Plane::Coronal: return {{0, 2, 1}, {1, 1, 1}};
    case Plane::Sagittal: return {{1, 2, 0}, {1, 1, 1}};
  }
  return {};
}

Volume3D apply_permutation(const Volume3D& v, const SignedPermutation& p) {
  const Dims& in = v.dims();
  const std::array<std::int64_t, 3> in_stride{1, static_cast<std::int64_t>(in[0]),
                                              static_cast<std::int64_t>(in[0] * in[1])};
  Dims out_dims{};
  Spacing out_spacing{};
  Orientation out_orient;
  std::array<std::int64_t, 3> step{};
  std::int64_t base = 0;
  for (int k = 0; k < 3; ++k) {
    const int s = p.source[k];
    out_dims[k] = in[s];
    out_spacing[k] = v.spacing()[s];
    const AxisCode a = v.orientation().axes[s];
    out_orient.axes[k] = p.sign[k] > 0 ? a : make_axis(world_axis(a), -axis_sign(a));
    step[k] = p.sign[k] * in_stride[s];
    if (p.sign[k] < 0) base += static_cast<std::int64_t>(in[s] - 1) * in_stride[s];
  }

  std::vector<float> data(v.size());
  const auto src = v.data();
  std::size_t o = 0;
  for (std::size_t z = 0; z < out_dims[2]; ++z) {
    const std::int64_t bz = base + static_cast<std::int64_t>(z) * step[2];
    for (std::size_t y = 0; y < out_dims[1]; ++y) {
      std::int64_t idx = bz + static_cast<std::int64_t>(y) * step[1];
      for (std::size_t x = 0; x < out_dims[0]; ++x, idx += step[0]) data[o++] = src[static_cast<std::size_t>(idx)];
    }
  }
  return Volume3D(out_dims, out_spacing, out_orient, std::move(data));
}

SignedPermutation canonical_permutation(const Orientation& o) noexcept {
  SignedPermutation p;
  for (int j = 0; j < 3; ++j) {
    const int w = world_axis(o.axes[j]);
    p.source[w] = j;
    p.sign[w] = axis_sign(o.axes[j]);
  }
  return p;
}

Volume3D to_canonical(const Volume3D& v) {
  if (v.orientation().is_ras()) return v;
  return apply_permutation(v, canonical_permutation(v.orientation()));
}

namespace {

Orientation plane_orientation(Plane plane) {
  const SignedPermutation p = plane_permutation(plane);
  Orientation o;
  for (int k = 0; k < 3; ++k) o.axes[k] = make_axis(p.source[k], p.sign[k]);
  return o;
}

}  // namespace

Volume3D reformat_to(const Volume3D& v, Plane plane) {
  if (!v.orientation().is_ras())
    fail(ErrorCode::OrientationMismatch, "reformat_to expects RAS input, got " + v.orientation().str());
  return apply_permutation(v, plane_permutation(plane));
}

Volume3D reformat_from(const Volume3D& v, Plane plane) {
  if (v.orientation() != plane_orientation(plane))
    fail(ErrorCode::OrientationMismatch, std::string("volume is not in ") + std::string(to_string(plane)) +
                                             " layout (" + v.orientation().str() + ")");
  return apply_permutation(v, plane_permutation(plane).inverse());
}

}  // namespace wmh

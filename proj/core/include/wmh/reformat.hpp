#pragma once

#include <array>
#include <string_view>

#include "wmh/volume.hpp"

namespace wmh {

/// Processing orientation of one orthogonal network.
enum class Plane { Axial, Sagittal, Coronal };

inline constexpr std::array<Plane, 3> kAllPlanes{Plane::Axial, Plane::Sagittal, Plane::Coronal};

std::string_view to_string(Plane p) noexcept;

/// Output axis k reads input axis `source[k]`, reversed when `sign[k]` is -1.
struct SignedPermutation {
  std::array<int, 3> source{0, 1, 2};
  std::array<int, 3> sign{1, 1, 1};

  using Matrix = std::array<std::array<int, 3>, 3>;

  /// M such that out_coord = M * in_coord (up to the flip offsets).
  Matrix matrix() const noexcept;
  SignedPermutation inverse() const noexcept;
  /// Applying `*this` after `first`.
  SignedPermutation after(const SignedPermutation& first) const noexcept;
  bool is_identity() const noexcept;

  friend bool operator==(const SignedPermutation&, const SignedPermutation&) = default;
};

/// Fixed table: Axial (x,y,z), Coronal (x,z,y), Sagittal (y,z,x); the slice axis is always last.
SignedPermutation plane_permutation(Plane p) noexcept;

/// Permutes/flips voxels and metadata. Values are moved, never interpolated.
Volume3D apply_permutation(const Volume3D& v, const SignedPermutation& p);

/// The permutation that takes a volume with orientation `o` to RAS.
SignedPermutation canonical_permutation(const Orientation& o) noexcept;

/// Reorders axes so the volume is RAS. Identity on RAS input.
Volume3D to_canonical(const Volume3D& v);

/// RAS volume -> plane layout. Throws OrientationMismatch on non-RAS input.
Volume3D reformat_to(const Volume3D& v, Plane plane);

/// Exact inverse of reformat_to. Throws OrientationMismatch if `v` is not in `plane` layout.
Volume3D reformat_from(const Volume3D& v, Plane plane);

}  // namespace wmh

#include <cmath>

#include "wmh/error.hpp"
#include "wmh/volume_io.hpp"

namespace wmh {

Volume3D normalize_intensity(const Volume3D& v, const Volume3D& mask) {
  if (!v.same_grid(mask)) fail(ErrorCode::ShapeMismatch, "mask grid differs from intensity volume");
  require_binary(mask, "brain mask");

  std::size_t n = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask[i] != 0.0f) {
      sum += v[i];
      ++n;
    }
  }
  if (n < 2) fail(ErrorCode::DegenerateMask, "fewer than two in-mask voxels");
  const double mean = sum / static_cast<double>(n);

  // Two-pass variance.
  double ss = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask[i] != 0.0f) {
      const double d = v[i] - mean;
      ss += d * d;
    }
  }
  const double sd = std::sqrt(ss / static_cast<double>(n));
  if (!(sd > 0.0) || !std::isfinite(sd)) fail(ErrorCode::DegenerateMask, "zero in-mask intensity variance");

  Volume3D out = v.like(0.0f);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (mask[i] != 0.0f) out[i] = static_cast<float>((v[i] - mean) / sd);
  return out;
}

}  // namespace wmh

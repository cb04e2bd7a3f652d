#pragma once

// Orthogonal-plane ensemble inference: per-plane tiled prediction, re-orientation to the
// canonical frame, meta-network fusion, thresholding and volume quantification.

#include <array>
#include <span>
#include <vector>

#include "wmh/network.hpp"
#include "wmh/reformat.hpp"
#include "wmh/volume.hpp"

namespace wmh {

/// Volume3D with values in [0, 1].
using PosteriorMap = Volume3D;

inline constexpr double kPosteriorSlack = 1e-6;

struct TilingOptions {
  /// Patch extent in tensor order (depth = z, height = y, width = x).
  Triple tile{64, 64, 64};
  /// Voxels shared by neighbouring tiles along each axis.
  std::size_t overlap = 16;
};

struct EnsembleSpec {
  NetworkSpec axial, sagittal, coronal;  // 1 in, 2 out
  NetworkSpec meta;                      // 3 in (axial, sagittal, coronal posteriors), 2 out
  double threshold = 0.5;
  TilingOptions tiling{};

  /// Throws InvalidArgument / ShapeCheckFailed on a malformed ensemble.
  void validate() const;
  const NetworkSpec& plane_network(Plane p) const noexcept;

  /// Picks networks by role tag: "axial", "sagittal", "coronal", "meta".
  static EnsembleSpec from_networks(std::span<const NetworkSpec> nets);
  /// Role-tagged copies of the four networks, in that order.
  std::vector<NetworkSpec> tagged_networks() const;
};

/// Tile origins along an axis of length n. Edge tiles are shifted inward, never padded.
std::vector<std::size_t> tile_starts(std::size_t n, std::size_t tile, std::size_t overlap);

/// Runs `net` over overlapping tiles; every voxel is the mean of all tile predictions covering it.
/// The network must preserve spatial extent. Throws TileTooSmall when the clamped tile is not a
/// viable network input.
Tensor4 tiled_forward(const NetworkSpec& net, const Tensor4& input, const TilingOptions& tiling);

/// Single-channel volume in, channel-1 posterior out.
PosteriorMap tiled_forward(const NetworkSpec& net, const Volume3D& v, const TilingOptions& tiling);

/// Throws NotAPosterior if any value leaves [0, 1] by more than kPosteriorSlack.
void check_posterior(const Volume3D& v, std::string_view what);

struct EnsembleResult {
  /// In RAS, regardless of the input orientation.
  PosteriorMap fused;
  /// Axial, sagittal, coronal posteriors mapped back to RAS.
  std::array<PosteriorMap, 3> planes;
};

/// `flair` is expected to be standardized already (normalize_intensity). Output is RAS, zero
/// outside the mask.
EnsembleResult run_ensemble(const EnsembleSpec& spec, const Volume3D& flair, const Volume3D& mask);
PosteriorMap predict_ensemble(const EnsembleSpec& spec, const Volume3D& flair, const Volume3D& mask);

/// 1 where posterior > threshold (strict), else 0.
Volume3D binarize(const PosteriorMap& posterior, double threshold);

/// Foreground voxel count times voxel volume, in millilitres. Throws NonBinaryInput.
double wmh_volume_ml(const Volume3D& mask);

struct SegmentationResult {
  PosteriorMap posterior;  // RAS
  Volume3D mask;           // RAS, binary
  double wmh_ml = 0.0;
  double normalize_ms = 0.0;
  double inference_ms = 0.0;
  double threshold_ms = 0.0;
};

/// Full per-subject path: canonicalize, standardize within the brain mask, ensemble, threshold.
SegmentationResult segment_flair(const EnsembleSpec& spec, const Volume3D& flair, const Volume3D& brain_mask);

}  // namespace wmh

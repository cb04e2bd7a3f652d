#pragma once

#include <cstddef>
#include <vector>

#include "wmh/volume.hpp"

namespace wmh {

struct HistParams {
  /// Lesion threshold = modal mean + alpha * modal SD.
  double alpha = 3.0;
  std::size_t bins = 256;
};

/// Diagnostics of the modal Gaussian fit.
struct HistogramFit {
  double range_min = 0.0, range_max = 0.0;
  std::vector<std::size_t> counts;
  std::size_t modal_bin = 0;
  std::size_t half_max_lo = 0, half_max_hi = 0;  // inclusive bin range
  double mode_mean = 0.0;
  double mode_sd = 0.0;
  double threshold = 0.0;
};

/// Fits a Gaussian to the dominant histogram mode of the in-mask intensities.
///
/// The mode is the most populated bin (lowest intensity wins ties). The half-maximum region is the
/// contiguous run of bins around it with count >= half the modal count. Mean and SD of the voxels
/// falling in that region estimate the mode; the SD is rescaled by the standard deviation of a unit
/// normal truncated to +-sqrt(2 ln 2) so that it estimates the untruncated sigma.
HistogramFit fit_histogram_mode(const Volume3D& flair, const Volume3D& mask, const HistParams& p);

/// Labels in-mask voxels brighter than mode_mean + alpha * mode_sd.
/// Errors: DegenerateMask, FlatHistogram, NonBinaryInput, ShapeMismatch.
Volume3D histogram_segment(const Volume3D& flair, const Volume3D& mask, const HistParams& p = {});

}  // namespace wmh

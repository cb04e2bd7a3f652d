#pragma once

// Synthetic FLAIR phantoms and handcrafted networks with known analytic behaviour.

#include <cstdint>

#include "wmh/stackgen.hpp"
#include "wmh/volume.hpp"

namespace wmh {

/// 1 -> 2 per-voxel network: softmax([0, w * (x - t)]). Channel 1 crosses 0.5 exactly at x == t.
NetworkSpec threshold_detector(double t, double w = 50.0, std::string role = {});

/// 3 -> 2 per-voxel network: channel 1 = softmax([0, w * (p1 + p2 + p3 - 1.5)]). For inputs that
/// are all near 0 or all near 1 it acts as a hard vote; with large w the all-zero case is exactly 0.
NetworkSpec threshold_meta(double w = 1000.0);

/// 3 -> 2 linear network: channel 1 = mean of the inputs, channel 0 = 1 - mean. No softmax.
NetworkSpec averaging_meta();

/// 1 -> 2 network whose channel-1 posterior is exactly 0 everywhere.
NetworkSpec zero_plane_network(std::string role = {});

struct Phantom {
  Volume3D flair;         // raw intensities, RAS
  Volume3D brain_mask;    // binary
  Volume3D ground_truth;  // binary, lesion voxels (inside the brain mask)
  /// Threshold in standardized intensity separating lesion from every other in-mask voxel.
  double threshold = 0.0;
  EnsembleSpec ensemble;  // three threshold detectors + threshold_meta
};

/// Ellipsoidal brain with tissue near 100 and several bright lesions near 200 (one of them a 5^3
/// cube). Deterministic in `seed`; every dimension must be at least 24.
Phantom make_phantom(std::uint64_t seed, Dims dims = {64, 64, 64});

}  // namespace wmh

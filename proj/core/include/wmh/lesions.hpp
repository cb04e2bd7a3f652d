#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "wmh/volume.hpp"

namespace wmh {

struct BoundingBox {
  std::array<std::size_t, 3> lo{};  // inclusive
  std::array<std::size_t, 3> hi{};  // inclusive
};

struct Lesion {
  int id = 0;
  std::size_t voxel_count = 0;
  double volume_ml = 0.0;
  BoundingBox bbox;
  /// Linear index of the first voxel in raster order.
  std::size_t first_index = 0;
};

struct LesionSet {
  /// 0 = background, lesion ids 1..K.
  Volume3D labels;
  /// Sorted by descending voxel_count, ties by first_index; lesions[i].id == i + 1.
  std::vector<Lesion> lesions;
  int connectivity = 26;

  std::size_t size() const noexcept { return lesions.size(); }
};

/// Connected components under 6-, 18- or 26-connectivity. Throws NonBinaryInput.
LesionSet label_components(const Volume3D& mask, int connectivity = 26);

struct LesionMatching {
  /// One-to-one pairs chosen greedily by greatest overlap (ties: smaller gt id, then smaller pred id).
  std::vector<std::pair<int, int>> pairs;  // (pred_id, gt_id)
  std::vector<int> unmatched_pred;         // no gt overlap: false positives
  std::vector<int> unmatched_gt;           // no pred overlap: false negatives
  /// Overlap a gt lesion, but that gt lesion was already paired: collapsed, not counted as FP.
  std::vector<int> collapsed_pred;
  /// Overlapped by a prediction, but that prediction was already paired: still detected.
  std::vector<int> collapsed_gt;

  std::size_t tp_lesions() const noexcept { return pairs.size() + collapsed_gt.size(); }
  std::size_t fp_lesions() const noexcept { return unmatched_pred.size(); }
  std::size_t fn_lesions() const noexcept { return unmatched_gt.size(); }
};

/// Detection-style lesion matching. Throws ShapeMismatch if the label grids differ.
LesionMatching match_lesions(const LesionSet& pred, const LesionSet& gt);

/// CSV lesion table: id,voxels,ml,x0,y0,z0,x1,y1,z1
std::string lesion_table_csv(const LesionSet& set);

}  // namespace wmh

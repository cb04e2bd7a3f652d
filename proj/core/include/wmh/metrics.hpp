#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wmh/lesions.hpp"
#include "wmh/volume.hpp"

namespace wmh {

struct VoxelCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

VoxelCounts voxel_counts(const Volume3D& pred, const Volume3D& gt);

/// 2|P n G| / (|P| + |G|); 1.0 when both masks are empty.
double dice_pixel(const Volume3D& pred, const Volume3D& gt);

/// 2 TP / (2 TP + FP + FN) over lesion detections; 1.0 when all three are zero.
double dice_lesion(const LesionMatching& matching);

/// 100 |pred - gt| / gt. Throws ZeroReference when gt_ml == 0.
double abs_volume_diff_pct(double pred_ml, double gt_ml);

struct PrPoint {
  /// Posterior value defining the operating point; voxels with posterior >= threshold are positive.
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct PrCurve {
  /// One point per distinct in-mask posterior value, descending threshold.
  std::vector<PrPoint> points;
  double auc = 0.0;
};

/// Precision-recall sweep over in-mask voxels with trapezoidal AUC over recall, starting from
/// (recall 0, precision of the first operating point). Throws NoPositives.
PrCurve pr_curve_auc(const Volume3D& posterior, const Volume3D& gt, const Volume3D& mask);

/// TSV with header "threshold\tprecision\trecall".
std::string pr_curve_tsv(const PrCurve& curve);

struct MetricReport {
  double dice_pixel = 0.0;
  double dice_lesion = 0.0;
  /// Absent when the reference volume is zero.
  std::optional<double> avd_percent;
  /// Absent unless a posterior was supplied.
  std::optional<double> auc_pr;
  VoxelCounts voxels;
  std::size_t tp_lesions = 0, fp_lesions = 0, fn_lesions = 0;
  double pred_ml = 0.0, gt_ml = 0.0;
};

MetricReport evaluate_segmentation(const Volume3D& pred, const Volume3D& gt, const Volume3D* posterior,
                                   const Volume3D* mask, int connectivity = 26);

}  // namespace wmh

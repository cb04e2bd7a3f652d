#include "wmh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wmh/error.hpp"
#include "wmh/stackgen.hpp"

namespace wmh {

VoxelCounts voxel_counts(const Volume3D& pred, const Volume3D& gt) {
  if (pred.dims() != gt.dims()) fail(ErrorCode::ShapeMismatch, "prediction and reference grids differ");
  require_binary(pred, "prediction");
  require_binary(gt, "reference");
  VoxelCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0.0f, g = gt[i] != 0.0f;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
  }
  return c;
}

double dice_pixel(const Volume3D& pred, const Volume3D& gt) {
  const VoxelCounts c = voxel_counts(pred, gt);
  const std::size_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 1.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double dice_lesion(const LesionMatching& m) {
  const std::size_t tp = m.tp_lesions(), fp = m.fp_lesions(), fn = m.fn_lesions();
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 1.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double abs_volume_diff_pct(double pred_ml, double gt_ml) {
  if (gt_ml == 0.0) fail(ErrorCode::ZeroReference, "reference volume is zero");
  return 100.0 * std::abs(pred_ml - gt_ml) / gt_ml;
}

PrCurve pr_curve_auc(const Volume3D& posterior, const Volume3D& gt, const Volume3D& mask) {
  if (posterior.dims() != gt.dims() || posterior.dims() != mask.dims())
    fail(ErrorCode::ShapeMismatch, "posterior, reference and mask grids differ");
  require_binary(gt, "reference");
  require_binary(mask, "brain mask");

  std::vector<std::pair<float, bool>> samples;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    if (mask[i] == 0.0f) continue;
    const bool label = gt[i] != 0.0f;
    positives += label;
    samples.emplace_back(posterior[i], label);
  }
  if (positives == 0) fail(ErrorCode::NoPositives, "reference has no in-mask positives");
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  PrCurve curve;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < samples.size();) {
    const float value = samples[i].first;
    for (; i < samples.size() && samples[i].first == value; ++i) (samples[i].second ? tp : fp)++;
    curve.points.push_back({value, static_cast<double>(tp) / static_cast<double>(tp + fp),
                            static_cast<double>(tp) / static_cast<double>(positives)});
  }

  double prev_recall = 0.0, prev_precision = curve.points.front().precision;
  for (const PrPoint& pt : curve.points) {
    curve.auc += (pt.recall - prev_recall) * 0.5 * (pt.precision + prev_precision);
    prev_recall = pt.recall;
    prev_precision = pt.precision;
  }
  return curve;
}

std::string pr_curve_tsv(const PrCurve& curve) {
  std::ostringstream os;
  os.precision(17);
  os << "threshold\tprecision\trecall\n";
  for (const PrPoint& p : curve.points) os << p.threshold << '\t' << p.precision << '\t' << p.recall << '\n';
  return os.str();
}

MetricReport evaluate_segmentation(const Volume3D& pred, const Volume3D& gt, const Volume3D* posterior,
                                   const Volume3D* mask, int connectivity) {
  MetricReport r;
  r.voxels = voxel_counts(pred, gt);
  r.dice_pixel = dice_pixel(pred, gt);
  const LesionMatching m = match_lesions(label_components(pred, connectivity), label_components(gt, connectivity));
  r.dice_lesion = dice_lesion(m);
  r.tp_lesions = m.tp_lesions();
  r.fp_lesions = m.fp_lesions();
  r.fn_lesions = m.fn_lesions();
  r.pred_ml = wmh_volume_ml(pred);
  r.gt_ml = wmh_volume_ml(gt);
  if (r.gt_ml > 0.0) r.avd_percent = abs_volume_diff_pct(r.pred_ml, r.gt_ml);
  if (posterior) {
    const Volume3D everywhere = gt.like(1.0f);
    r.auc_pr = pr_curve_auc(*posterior, gt, mask ? *mask : everywhere).auc;
  }
  return r;
}

}  // namespace wmh

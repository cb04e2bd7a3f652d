#include "wmh/histo_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wmh/error.hpp"

namespace wmh {
namespace {

// SD of a standard normal truncated to [-a, a] with a = sqrt(2 ln 2) (the half-maximum points).
double half_max_truncation_sd() {
  const double a = std::sqrt(2.0 * std::numbers::ln2);
  const double pdf = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
  const double mass = std::erf(a / std::numbers::sqrt2);
  return std::sqrt(1.0 - 2.0 * a * pdf / mass);
}

std::size_t bin_of(double x, double lo, double width, std::size_t bins) {
  const auto b = static_cast<std::size_t>(std::floor((x - lo) / width));
  return std::min(b, bins - 1);
}

}  // namespace

HistogramFit fit_histogram_mode(const Volume3D& flair, const Volume3D& mask, const HistParams& p) {
  if (!flair.same_grid(mask)) fail(ErrorCode::ShapeMismatch, "mask grid differs from FLAIR");
  require_binary(mask, "brain mask");
  if (!(p.alpha > 0.0)) fail(ErrorCode::InvalidArgument, "alpha must be > 0");
  if (p.bins < 16) fail(ErrorCode::InvalidArgument, "need at least 16 histogram bins");

  std::vector<double> values;
  for (std::size_t i = 0; i < flair.size(); ++i)
    if (mask[i] != 0.0f) values.push_back(flair[i]);
  if (values.size() < 2) fail(ErrorCode::DegenerateMask, "fewer than two in-mask voxels");

  HistogramFit fit;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  fit.range_min = *mn;
  fit.range_max = *mx;
  if (!(fit.range_max > fit.range_min)) fail(ErrorCode::DegenerateMask, "constant in-mask intensity");
  const double width = (fit.range_max - fit.range_min) / static_cast<double>(p.bins);

  fit.counts.assign(p.bins, 0);
  for (double v : values) ++fit.counts[bin_of(v, fit.range_min, width, p.bins)];

  const auto cmax = std::max_element(fit.counts.begin(), fit.counts.end());
  if (std::all_of(fit.counts.begin(), fit.counts.end(), [&](std::size_t c) { return c == 0 || c == *cmax; }))
    fail(ErrorCode::FlatHistogram, "every occupied bin has the same count; no dominant mode");
  // max_element returns the first maximum, i.e. the lowest-intensity modal bin.
  fit.modal_bin = static_cast<std::size_t>(cmax - fit.counts.begin());

  const double half = 0.5 * static_cast<double>(*cmax);
  fit.half_max_lo = fit.half_max_hi = fit.modal_bin;
  while (fit.half_max_lo > 0 && static_cast<double>(fit.counts[fit.half_max_lo - 1]) >= half) --fit.half_max_lo;
  while (fit.half_max_hi + 1 < p.bins && static_cast<double>(fit.counts[fit.half_max_hi + 1]) >= half)
    ++fit.half_max_hi;

  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    const std::size_t b = bin_of(v, fit.range_min, width, p.bins);
    if (b >= fit.half_max_lo && b <= fit.half_max_hi) {
      sum += v;
      ++n;
    }
  }
  fit.mode_mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) {
    const std::size_t b = bin_of(v, fit.range_min, width, p.bins);
    if (b >= fit.half_max_lo && b <= fit.half_max_hi) ss += (v - fit.mode_mean) * (v - fit.mode_mean);
  }
  const double truncated_sd = std::sqrt(ss / static_cast<double>(n));
  if (!(truncated_sd > 0.0)) fail(ErrorCode::DegenerateMask, "modal region has zero spread");
  fit.mode_sd = truncated_sd / half_max_truncation_sd();
  fit.threshold = fit.mode_mean + p.alpha * fit.mode_sd;
  return fit;
}

Volume3D histogram_segment(const Volume3D& flair, const Volume3D& mask, const HistParams& p) {
  const HistogramFit fit = fit_histogram_mode(flair, mask, p);
  Volume3D out = flair.like(0.0f);
  for (std::size_t i = 0; i < flair.size(); ++i)
    if (mask[i] != 0.0f && static_cast<double>(flair[i]) > fit.threshold) out[i] = 1.0f;
  return out;
}

}  // namespace wmh

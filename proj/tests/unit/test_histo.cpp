#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "generators.hpp"
#include "wmh/error.hpp"
#include "wmh/histo_baseline.hpp"

using namespace wmh;
using wmh::testing::Rng;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::Io;
}

double truncated_normal(Rng& rng, double mean, double sd, double limit) {
  for (;;) {
    const double z = wmh::testing::normal(rng);
    if (std::fabs(z) <= limit) return mean + sd * z;
  }
}

// 10^4 tissue voxels around 100 followed by 200 voxels at 180, all in a single row of a volume.
Volume3D mixture(Rng& rng, double truncate_at) {
  Volume3D v({10200, 1, 1});
  for (std::size_t i = 0; i < 10000; ++i)
    v[i] = static_cast<float>(truncate_at > 0 ? truncated_normal(rng, 100, 10, truncate_at)
                                              : 100 + 10 * wmh::testing::normal(rng));
  for (std::size_t i = 10000; i < 10200; ++i) v[i] = 180.0f;
  return v;
}

}  // namespace

TEST(Histogram, ConstantInputIsDegenerate) {
  const Volume3D v({8, 8, 8}, {1, 1, 1}, Orientation::ras(), 42.0f);
  EXPECT_EQ(code_of([&] { histogram_segment(v, v.like(1.0f)); }), ErrorCode::DegenerateMask);
  EXPECT_EQ(code_of([&] { histogram_segment(v, v.like(0.0f)); }), ErrorCode::DegenerateMask);
}

TEST(Histogram, EvenlySpreadInputIsFlat) {
  Volume3D v({256, 1, 1});
  for (std::size_t i = 0; i < 256; ++i) v[i] = static_cast<float>(i);
  EXPECT_EQ(code_of([&] { histogram_segment(v, v.like(1.0f)); }), ErrorCode::FlatHistogram);
}

TEST(Histogram, BadArguments) {
  Rng rng(1);
  const Volume3D v = wmh::testing::random_volume(rng, {6, 6, 6});
  const Volume3D m = v.like(1.0f);
  EXPECT_EQ(code_of([&] { histogram_segment(v, m, {0.0, 256}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { histogram_segment(v, m, {3.0, 4}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { histogram_segment(v, Volume3D({6, 6, 5}, {1, 1, 1}, Orientation::ras(), 1.0f)); }),
            ErrorCode::ShapeMismatch);
  Volume3D fuzzy = m;
  fuzzy[3] = 0.5f;
  EXPECT_EQ(code_of([&] { histogram_segment(v, fuzzy); }), ErrorCode::NonBinaryInput);
}

TEST(Histogram, BoundedTissueLeavesExactlyTheBrightVoxels) {
  Rng rng(2);
  const Volume3D v = mixture(rng, 2.5);
  // 64 bins keep the tissue mode taller than the 200-voxel spike at 180.
  const HistParams p{3.0, 64};
  const HistogramFit fit = fit_histogram_mode(v, v.like(1.0f), p);
  EXPECT_NEAR(fit.mode_mean, 100.0, 1.0);
  EXPECT_NEAR(fit.mode_sd, 10.0, 1.5);
  EXPECT_NEAR(fit.threshold, 130.0, 5.0);
  const Volume3D out = histogram_segment(v, v.like(1.0f), p);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(out[i], i >= 10000 ? 1.0f : 0.0f) << i;
}

TEST(Histogram, UnboundedTissueMatchesThresholdCount) {
  Rng rng(3);
  const Volume3D v = mixture(rng, 0.0);
  const HistParams p{3.0, 64};
  const HistogramFit fit = fit_histogram_mode(v, v.like(1.0f), p);
  const Volume3D out = histogram_segment(v, v.like(1.0f), p);
  std::size_t expected = 0;
  for (float x : v.data()) expected += static_cast<double>(x) > fit.threshold;
  EXPECT_EQ(count_foreground(out), expected);
  for (std::size_t i = 10000; i < 10200; ++i) EXPECT_EQ(out[i], 1.0f);
  EXPECT_LT(expected, 10200u + 50u);
}

TEST(Histogram, ModalSdEstimatesGaussianSigma) {
  Rng rng(4);
  Volume3D v({40000, 1, 1});
  for (float& x : v.data()) x = static_cast<float>(50 + 4 * wmh::testing::normal(rng));
  const HistogramFit fit = fit_histogram_mode(v, v.like(1.0f), {3.0, 128});
  EXPECT_NEAR(fit.mode_mean, 50.0, 0.3);
  EXPECT_NEAR(fit.mode_sd, 4.0, 0.3);
  EXPECT_LE(fit.half_max_lo, fit.modal_bin);
  EXPECT_GE(fit.half_max_hi, fit.modal_bin);
  for (std::size_t b = fit.half_max_lo; b <= fit.half_max_hi; ++b)
    EXPECT_GE(2 * fit.counts[b], fit.counts[fit.modal_bin]);
}

TEST(Histogram, HugeAlphaGivesEmptyMask) {
  Rng rng(5);
  const Volume3D v = mixture(rng, 0.0);
  EXPECT_EQ(count_foreground(histogram_segment(v, v.like(1.0f), {1e6, 64})), 0u);
}

TEST(Histogram, MonotoneInAlphaAndInsideMask) {
  Rng rng(6);
  for (int rep = 0; rep < 5; ++rep) {
    const Volume3D v = wmh::testing::random_volume(rng, {12, 12, 12});
    const Volume3D m = wmh::testing::random_mask(rng, {12, 12, 12}, 0.7);
    Volume3D prev;
    for (double alpha : {0.25, 0.5, 1.0, 2.0, 3.0, 5.0}) {
      const Volume3D out = histogram_segment(v, m, {alpha, 32});
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] != 0.0f) EXPECT_EQ(m[i], 1.0f);
        if (!prev.empty() && out[i] != 0.0f) EXPECT_EQ(prev[i], 1.0f);
      }
      prev = out;
    }
  }
}

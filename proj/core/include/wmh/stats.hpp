#pragma once

// Agreement statistics (Bland-Altman, paired t-test) and covariate-adjusted OLS regression.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wmh/subject.hpp"

namespace wmh {

/// P(T <= t) for Student's t with `df` degrees of freedom, via the regularized incomplete beta.
double student_t_cdf(double t, double df);
/// Two-sided tail probability P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

struct BlandAltmanPoint {
  double mean = 0.0;
  double difference = 0.0;  // b - a
};

struct BlandAltmanResult {
  std::size_t n = 0;
  double bias = 0.0;     // mean of b - a
  double sd_diff = 0.0;  // sample SD of the differences
  double loa_low = 0.0, loa_high = 0.0;
  double grand_mean = 0.0;  // mean of the pairwise means
  double cv_percent = 0.0;
  double rpc_percent = 0.0;  // 1.96 * cv_percent
  double r_squared = 0.0;    // squared Pearson correlation of a and b
  std::vector<BlandAltmanPoint> points;
};

/// Errors: LengthMismatch, TooFewPairs (n < 3), ZeroMeanReference.
BlandAltmanResult bland_altman(std::span<const double> a, std::span<const double> b);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double mean_diff = 0.0;
  double sd_diff = 0.0;
  /// Zero SD with a nonzero mean difference: t is infinite and p is reported as 0.
  bool degenerate = false;
};

/// Two-sided paired t-test on d = a - b. Errors: LengthMismatch, TooFewPairs (n < 2).
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

/// Adjusters available to build_design_matrix.
enum class Covariate { Age, Icv, Sex, Education, Apoe4, Diagnosis };

std::string_view to_string(Covariate c) noexcept;
std::optional<Covariate> parse_covariate(std::string_view name) noexcept;
/// Age, ICV, sex, education, APOE4 and diagnosis.
std::vector<Covariate> default_covariates();

struct DesignOptions {
  /// Regress on log10(exposure); rows with a non-positive exposure are dropped.
  bool log10_exposure = false;
};

struct DesignMatrix {
  std::vector<std::string> columns;
  std::size_t rows = 0;
  std::vector<double> x;  // row-major rows x columns.size()
  std::vector<double> y;
  std::vector<std::string> ids;
  std::size_t dropped = 0;

  std::size_t cols() const noexcept { return columns.size(); }
  double at(std::size_t r, std::size_t c) const noexcept { return x[r * columns.size() + c]; }
};

/// Columns in fixed order: intercept, exposure, age, icv, sex (M=1), education, apoe4, dx_mci, dx_ad
/// (only those requested). Complete-case: rows missing any required field are dropped and counted.
/// Throws NoCompleteRows.
DesignMatrix build_design_matrix(std::span<const SubjectRecord> records, Field outcome, Field exposure,
                                 std::span<const Covariate> covariates, const DesignOptions& options = {});

struct RegressionResult {
  std::vector<std::string> names;
  std::vector<double> estimates;
  std::vector<double> std_errors;
  std::vector<double> t_statistics;
  std::vector<double> p_values;
  double r_squared = 0.0;
  double rss = 0.0;
  double df_resid = 0.0;
  std::size_t n_used = 0;
  std::size_t n_dropped = 0;
  /// Residuals vanish: standard errors are 0 and p-values are reported as 0.
  bool exact_fit = false;
};

/// Least squares by column-pivoted Householder QR. A column whose pivot falls below 1e-10 of the
/// largest is rank deficient. Errors: TooFewRows (rows <= cols), RankDeficient.
RegressionResult ols_regress(const DesignMatrix& design);
RegressionResult ols_regress(std::span<const double> x_row_major, std::size_t cols, std::span<const double> y,
                             std::vector<std::string> names = {});

}  // namespace wmh

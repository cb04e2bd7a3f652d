#include "wmh/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cctype>
#include <cmath>
#include <limits>

#include "wmh/error.hpp"

namespace wmh {
namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) fail(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  // P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)
  return boost::math::ibeta(0.5 * df, 0.5, df / (df + t * t));
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t < 0.0 ? tail : 1.0 - tail;
}

BlandAltmanResult bland_altman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::LengthMismatch, "series lengths differ");
  if (a.size() < 3) fail(ErrorCode::TooFewPairs, "Bland-Altman needs at least 3 pairs");

  BlandAltmanResult r;
  r.n = a.size();
  std::vector<double> diff(r.n), means(r.n);
  for (std::size_t i = 0; i < r.n; ++i) {
    diff[i] = b[i] - a[i];
    means[i] = 0.5 * (a[i] + b[i]);
    r.points.push_back({means[i], diff[i]});
  }
  r.bias = mean_of(diff);
  r.sd_diff = sample_sd(diff, r.bias);
  r.loa_low = r.bias - 1.96 * r.sd_diff;
  r.loa_high = r.bias + 1.96 * r.sd_diff;
  r.grand_mean = mean_of(means);
  if (r.grand_mean == 0.0) fail(ErrorCode::ZeroMeanReference, "grand mean of pairwise means is zero");
  r.cv_percent = 100.0 * r.sd_diff / r.grand_mean;
  r.rpc_percent = 1.96 * r.cv_percent;

  const double ma = mean_of(a), mb = mean_of(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < r.n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) {
    // Correlation undefined for a constant series; identical series still agree perfectly.
    r.r_squared = std::equal(a.begin(), a.end(), b.begin()) ? 1.0 : 0.0;
  } else {
    r.r_squared = std::clamp(sab * sab / (saa * sbb), 0.0, 1.0);
  }
  return r;
}

TTestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::LengthMismatch, "series lengths differ");
  if (a.size() < 2) fail(ErrorCode::TooFewPairs, "paired t-test needs at least 2 pairs");

  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  TTestResult r;
  r.df = static_cast<double>(d.size() - 1);
  r.mean_diff = mean_of(d);
  r.sd_diff = sample_sd(d, r.mean_diff);
  if (r.sd_diff == 0.0) {
    if (r.mean_diff == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), r.mean_diff);
      r.p = 0.0;
      r.degenerate = true;
    }
    return r;
  }
  r.t = r.mean_diff / (r.sd_diff / std::sqrt(static_cast<double>(d.size())));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

std::string_view to_string(Covariate c) noexcept {
  switch (c) {
    case Covariate::Age: return "age";
    case Covariate::Icv: return "icv";
    case Covariate::Sex: return "sex";
    case Covariate::Education: return "education";
    case Covariate::Apoe4: return "apoe4";
    case Covariate::Diagnosis: return "diagnosis";
  }
  return "?";
}

std::optional<Covariate> parse_covariate(std::string_view name) noexcept {
  for (Covariate c : {Covariate::Age, Covariate::Icv, Covariate::Sex, Covariate::Education, Covariate::Apoe4,
                      Covariate::Diagnosis})
    if (iequals(name, to_string(c))) return c;
  if (iequals(name, "icv_ml")) return Covariate::Icv;
  if (iequals(name, "dx")) return Covariate::Diagnosis;
  return std::nullopt;
}

std::vector<Covariate> default_covariates() {
  return {Covariate::Age, Covariate::Icv, Covariate::Sex, Covariate::Education, Covariate::Apoe4,
          Covariate::Diagnosis};
}

DesignMatrix build_design_matrix(std::span<const SubjectRecord> records, Field outcome, Field exposure,
                                 std::span<const Covariate> covariates, const DesignOptions& options) {
  auto wants = [&](Covariate c) { return std::find(covariates.begin(), covariates.end(), c) != covariates.end(); };

  DesignMatrix dm;
  dm.columns = {"intercept", std::string(to_string(exposure)) + (options.log10_exposure ? "_log10" : "")};
  if (wants(Covariate::Age)) dm.columns.push_back("age");
  if (wants(Covariate::Icv)) dm.columns.push_back("icv");
  if (wants(Covariate::Sex)) dm.columns.push_back("sex_m");
  if (wants(Covariate::Education)) dm.columns.push_back("education");
  if (wants(Covariate::Apoe4)) dm.columns.push_back("apoe4");
  if (wants(Covariate::Diagnosis)) {
    dm.columns.push_back("dx_mci");
    dm.columns.push_back("dx_ad");
  }

  std::vector<double> row;
  for (const SubjectRecord& r : records) {
    row.clear();
    const auto y = field_value(r, outcome);
    auto e = field_value(r, exposure);
    if (e && options.log10_exposure) e = *e > 0.0 ? std::optional(std::log10(*e)) : std::nullopt;
    bool complete = y.has_value() && e.has_value();
    if (complete) {
      row.push_back(1.0);
      row.push_back(*e);
    }
    if (complete && wants(Covariate::Age)) {
      complete = r.age.has_value();
      if (complete) row.push_back(*r.age);
    }
    if (complete && wants(Covariate::Icv)) {
      complete = r.icv_ml.has_value();
      if (complete) row.push_back(*r.icv_ml);
    }
    if (complete && wants(Covariate::Sex)) {
      complete = r.sex.has_value();
      if (complete) row.push_back(*r.sex == Sex::M ? 1.0 : 0.0);
    }
    if (complete && wants(Covariate::Education)) {
      complete = r.education.has_value();
      if (complete) row.push_back(*r.education);
    }
    if (complete && wants(Covariate::Apoe4)) {
      complete = r.apoe4.has_value();
      if (complete) row.push_back(static_cast<double>(*r.apoe4));
    }
    if (complete && wants(Covariate::Diagnosis)) {
      complete = r.diagnosis.has_value();
      if (complete) {
        row.push_back(*r.diagnosis == Diagnosis::MCI ? 1.0 : 0.0);
        row.push_back(*r.diagnosis == Diagnosis::AD ? 1.0 : 0.0);
      }
    }
    if (!complete) {
      ++dm.dropped;
      continue;
    }
    dm.x.insert(dm.x.end(), row.begin(), row.end());
    dm.y.push_back(*y);
    dm.ids.push_back(r.id);
    ++dm.rows;
  }
  if (dm.rows == 0) fail(ErrorCode::NoCompleteRows, "no record has every required field");
  return dm;
}

RegressionResult ols_regress(const DesignMatrix& design) {
  RegressionResult r = ols_regress(design.x, design.cols(), design.y, design.columns);
  r.n_dropped = design.dropped;
  return r;
}

RegressionResult ols_regress(std::span<const double> x_row_major, std::size_t cols, std::span<const double> y,
                             std::vector<std::string> names) {
  if (cols == 0 || x_row_major.size() % cols != 0 || x_row_major.size() / cols != y.size())
    fail(ErrorCode::LengthMismatch, "design matrix and outcome sizes disagree");
  const std::size_t n = y.size();
  if (n <= cols) fail(ErrorCode::TooFewRows, std::to_string(n) + " rows for " + std::to_string(cols) + " columns");
  if (names.empty())
    for (std::size_t j = 0; j < cols; ++j) names.push_back("x" + std::to_string(j));

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> X(x_row_major.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
  const Eigen::Map<const Eigen::VectorXd> Y(y.data(), static_cast<Eigen::Index>(n));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (static_cast<std::size_t>(qr.rank()) < cols) {
    // The permutation's trailing columns are the ones that could not be pivoted.
    std::string which;
    for (Eigen::Index k = qr.rank(); k < static_cast<Eigen::Index>(cols); ++k) {
      if (!which.empty()) which += ", ";
      which += names[static_cast<std::size_t>(qr.colsPermutation().indices()[k])];
    }
    fail(ErrorCode::RankDeficient, "design matrix is rank deficient (collinear: " + which + ")");
  }

  const Eigen::VectorXd beta = qr.solve(Y);
  const Eigen::VectorXd resid = Y - X * beta;

  RegressionResult r;
  r.names = std::move(names);
  r.n_used = n;
  r.df_resid = static_cast<double>(n - cols);
  r.rss = resid.squaredNorm();
  const double ybar = Y.mean();
  const double tss = (Y.array() - ybar).square().sum();
  r.exact_fit = r.rss <= 1e-24 * std::max(tss, std::numeric_limits<double>::min()) || r.rss == 0.0;
  r.r_squared = tss > 0.0 ? 1.0 - r.rss / tss : (r.exact_fit ? 1.0 : 0.0);

  // (X^T X)^{-1} = P R^{-1} R^{-T} P^T
  const auto k = static_cast<Eigen::Index>(cols);
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::VectorXd diag_perm = (Rinv * Rinv.transpose()).diagonal();
  Eigen::VectorXd diag(k);
  for (Eigen::Index i = 0; i < k; ++i) diag(qr.colsPermutation().indices()[i]) = diag_perm(i);

  const double s2 = r.exact_fit ? 0.0 : r.rss / r.df_resid;
  for (std::size_t j = 0; j < cols; ++j) {
    const double est = beta(static_cast<Eigen::Index>(j));
    const double se = std::sqrt(s2 * diag(static_cast<Eigen::Index>(j)));
    r.estimates.push_back(est);
    r.std_errors.push_back(se);
    if (se > 0.0) {
      const double t = est / se;
      r.t_statistics.push_back(t);
      r.p_values.push_back(student_t_two_sided_p(t, r.df_resid));
    } else {
      r.t_statistics.push_back(est == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), est));
      r.p_values.push_back(est == 0.0 ? 1.0 : 0.0);
    }
  }
  return r;
}

}  // namespace wmh

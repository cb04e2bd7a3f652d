#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "run.hpp"

namespace wmh::cli {

namespace fs = std::filesystem;

inline constexpr const char* kWeightsEnv = "WMH_WEIGHTS_DIR";

struct Outcome {
  Outcome() = default;
  Outcome(json r) : report(std::move(r)) {}

  json report;
  int exit_code = 0;
  std::vector<std::string> warnings;
};

struct SegmentOptions {
  fs::path flair, mask, weights;
  fs::path out_posterior, out_mask, lesions_csv;
  fs::path batch_dir, out_dir;
  double threshold = 0.5;
  std::vector<std::size_t> tile{64};
  std::size_t overlap = 16;
  int connectivity = 26;
  unsigned jobs = 1;
};

struct BaselineOptions {
  fs::path flair, mask, out_mask;
  double alpha = 3.0;
  std::size_t bins = 256;
  int connectivity = 26;
};

struct EvaluateOptions {
  fs::path pred, gt, posterior, mask, pr_tsv;
  int connectivity = 26;
};

struct PairOptions {
  fs::path csv, points_tsv;
  std::string a, b;
};

struct RegressOptions {
  fs::path cohort;
  std::string outcome, exposure;
  std::optional<std::string> covariates;  // comma list; "none" for no adjusters
  bool log10_exposure = false;
};

struct SummaryOptions {
  fs::path cohort;
  std::string format = "json";
};

struct PhantomOptions {
  fs::path out_dir;
  std::uint64_t seed = 1;
  std::size_t size = 64;
};

Outcome cmd_segment(const SegmentOptions& o);
Outcome cmd_baseline(const BaselineOptions& o);
Outcome cmd_evaluate(const EvaluateOptions& o);
Outcome cmd_agree(const PairOptions& o);
Outcome cmd_ttest(const PairOptions& o);
Outcome cmd_regress(const RegressOptions& o);
/// For the text format the rendered table is returned in report["table"].
Outcome cmd_cohort_summary(const SummaryOptions& o);
Outcome cmd_phantom(const PhantomOptions& o);

}  // namespace wmh::cli

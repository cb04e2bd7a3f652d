#include "wmh_cli/cli.hpp"

#include <ostream>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "wmh/volume_io.hpp"

namespace wmh::cli {

int exit_code_for(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::Degenerate: return 1;
    case ErrorCategory::Format: return 3;
    case ErrorCategory::Io:
    case ErrorCategory::Shape:
    case ErrorCategory::Argument: return 2;
  }
  return 2;
}

namespace {

void add_connectivity(CLI::App* cmd, int& value) {
  cmd->add_option("--connectivity", value, "Lesion neighbourhood (6, 18 or 26)")
      ->check(CLI::IsMember({6, 18, 26}))
      ->capture_default_str();
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"White matter hyperintensity segmentation and quantification", "wmhq"};
  app.require_subcommand(1);
  app.set_version_flag("--version", WMH_VERSION);
  fs::path report_path;
  app.add_option("--report", report_path, "Write the JSON report here instead of stdout");

  SegmentOptions seg;
  auto* segment = app.add_subcommand("segment", "Ensemble segmentation of a FLAIR volume");
  segment->add_option("--flair", seg.flair, "FLAIR NIfTI");
  segment->add_option("--mask", seg.mask, "Brain mask NIfTI");
  segment->add_option("--weights", seg.weights,
                      std::string("Weights file or directory (default: $") + kWeightsEnv + ")");
  segment->add_option("--threshold", seg.threshold, "Posterior threshold")->capture_default_str();
  segment->add_option("--tile", seg.tile, "Tile size D [H W]")->expected(1, 3)->capture_default_str();
  segment->add_option("--overlap", seg.overlap, "Tile overlap in voxels")->capture_default_str();
  segment->add_option("--out-posterior", seg.out_posterior, "Posterior NIfTI output");
  segment->add_option("--out-mask", seg.out_mask, "Binary WMH mask output");
  segment->add_option("--lesions", seg.lesions_csv, "Lesion table CSV output");
  segment->add_option("--batch-dir", seg.batch_dir, "Directory of subject folders (flair + mask each)");
  segment->add_option("--out-dir", seg.out_dir, "Output directory for --batch-dir");
  segment->add_option("--jobs", seg.jobs, "Subjects processed concurrently")
      ->check(CLI::Range(1u, 256u))
      ->capture_default_str();
  add_connectivity(segment, seg.connectivity);

  BaselineOptions base;
  auto* baseline = app.add_subcommand("baseline", "Histogram-mode threshold segmentation");
  baseline->add_option("--flair", base.flair, "FLAIR NIfTI")->required();
  baseline->add_option("--mask", base.mask, "Brain mask NIfTI")->required();
  baseline->add_option("--out-mask", base.out_mask, "Binary WMH mask output")->required();
  baseline->add_option("--alpha", base.alpha, "SDs above the modal intensity")->capture_default_str();
  baseline->add_option("--bins", base.bins, "Histogram bins")->capture_default_str();
  add_connectivity(baseline, base.connectivity);

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Segmentation metrics against a reference");
  evaluate->add_option("--pred", ev.pred, "Predicted binary mask")->required();
  evaluate->add_option("--gt", ev.gt, "Reference binary mask")->required();
  evaluate->add_option("--posterior", ev.posterior, "Posterior map (enables PR metrics)");
  evaluate->add_option("--mask", ev.mask, "Brain mask restricting PR metrics");
  evaluate->add_option("--pr-tsv", ev.pr_tsv, "Precision-recall curve output");
  add_connectivity(evaluate, ev.connectivity);

  PairOptions agree_opts, ttest_opts;
  auto* agree = app.add_subcommand("agree", "Bland-Altman agreement of two CSV columns");
  auto* ttest = app.add_subcommand("ttest", "Two-sided paired t-test of two CSV columns");
  for (auto [cmd, opts] : {std::pair{agree, &agree_opts}, std::pair{ttest, &ttest_opts}}) {
    cmd->add_option("--csv", opts->csv, "Input CSV")->required();
    cmd->add_option("-a,--a", opts->a, "First column")->required();
    cmd->add_option("-b,--b", opts->b, "Second column")->required();
  }
  agree->add_option("--points-tsv", agree_opts.points_tsv, "Bland-Altman points output");

  RegressOptions reg;
  auto* regress = app.add_subcommand("regress", "Covariate-adjusted linear regression on a cohort");
  regress->add_option("--cohort", reg.cohort, "Cohort CSV")->required();
  regress->add_option("--outcome", reg.outcome, "Outcome column, e.g. adni_ef")->required();
  regress->add_option("--exposure", reg.exposure, "Exposure column")->default_val("wmh_stackgen_ml");
  regress->add_option("--covariates", reg.covariates,
                      "Comma-separated adjusters or 'none' (default: age,icv,sex,education,apoe4,diagnosis)");
  regress->add_flag("--log10", reg.log10_exposure, "Regress on log10 of the exposure");

  SummaryOptions sum;
  auto* summary = app.add_subcommand("cohort-summary", "Demographics per diagnosis group");
  summary->add_option("--cohort", sum.cohort, "Cohort CSV")->required();
  summary->add_option("--format", sum.format, "json or text")->capture_default_str();

  PhantomOptions ph;
  auto* phantom = app.add_subcommand("phantom", "Synthetic FLAIR phantom with matching handcrafted weights");
  phantom->add_option("--out-dir", ph.out_dir, "Output directory")->required();
  phantom->add_option("--seed", ph.seed, "Random seed")->capture_default_str();
  phantom->add_option("--size", ph.size, "Cubic volume edge length")->check(CLI::Range(24, 512))->capture_default_str();

  std::vector<std::string> storage{"wmhq"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    Outcome result;
    if (*segment) result = cmd_segment(seg);
    else if (*baseline) result = cmd_baseline(base);
    else if (*evaluate) result = cmd_evaluate(ev);
    else if (*agree) result = cmd_agree(agree_opts);
    else if (*ttest) result = cmd_ttest(ttest_opts);
    else if (*regress) result = cmd_regress(reg);
    else if (*summary) result = cmd_cohort_summary(sum);
    else result = cmd_phantom(ph);

    for (const auto& w : result.warnings) err << "wmhq: warning: " << w << "\n";
    if (result.report.contains("table")) {
      out << result.report["table"].get<std::string>();
      result.report.erase("table");
      if (!report_path.empty()) {
        const std::string text = result.report.dump(2) + "\n";
        write_file_bytes(report_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
      }
    } else {
      const std::string text = result.report.dump(2) + "\n";
      if (report_path.empty()) out << text;
      else write_file_bytes(report_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    }
    if (result.exit_code != 0) err << "wmhq: one or more subjects failed\n";
    return result.exit_code;
  } catch (const Error& e) {
    err << "wmhq: " << to_string(e.category()) << " error: " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "wmhq: IO error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "wmhq: error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace wmh::cli

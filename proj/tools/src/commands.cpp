#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <string_view>
#include <thread>

#include "wmh/cohort.hpp"
#include "wmh/error.hpp"
#include "wmh/histo_baseline.hpp"
#include "wmh/lesions.hpp"
#include "wmh/metrics.hpp"
#include "wmh/phantom.hpp"
#include "wmh/sgwt.hpp"
#include "wmh/stackgen.hpp"
#include "wmh/stats.hpp"
#include "wmh/volume_io.hpp"
#include "wmh_cli/cli.hpp"

namespace wmh::cli {

namespace {

std::string text_of(const std::vector<std::uint8_t>& bytes) { return std::string(bytes.begin(), bytes.end()); }

void write_text(const fs::path& path, std::string_view text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Volume3D read_volume(Run& run, const fs::path& path, std::string_view role) {
  return run.timed("read", [&] { return parse_nifti(run.read_input(path, role)); });
}

TilingOptions tiling_from(const std::vector<std::size_t>& tile, std::size_t overlap) {
  TilingOptions t;
  if (tile.size() == 1) t.tile = {tile[0], tile[0], tile[0]};
  else if (tile.size() == 3) t.tile = {tile[0], tile[1], tile[2]};
  else fail(ErrorCode::InvalidArgument, "--tile takes one or three sizes");
  t.overlap = overlap;
  return t;
}

fs::path resolve_weights(const fs::path& given) {
  if (!given.empty()) return given;
  const char* env = std::getenv(kWeightsEnv);
  if (!env || !*env)
    fail(ErrorCode::InvalidArgument, std::string("no --weights given and ") + kWeightsEnv + " is not set");
  return env;
}

EnsembleSpec load_ensemble(Run& run, const fs::path& given) {
  const fs::path path = resolve_weights(given);
  std::vector<NetworkSpec> nets;
  if (fs::is_directory(path)) {
    if (fs::exists(path / "ensemble.sgwt")) {
      nets = load_networks(run.read_input(path / "ensemble.sgwt", "weights"));
    } else {
      for (const char* role : {"axial", "sagittal", "coronal", "meta"}) {
        NetworkSpec net = load_network(run.read_input(path / (std::string(role) + ".sgwt"), "weights"));
        if (net.role.empty()) net.role = role;
        nets.push_back(std::move(net));
      }
    }
  } else {
    nets = load_networks(run.read_input(path, "weights"));
  }
  run.params()["weights"] = path.string();
  return EnsembleSpec::from_networks(nets);
}

json segment_subject(Run& run, const EnsembleSpec& spec, const fs::path& flair_path, const fs::path& mask_path,
                     const fs::path& out_posterior, const fs::path& out_mask, const fs::path& lesions_csv,
                     int connectivity) {
  const Volume3D flair = read_volume(run, flair_path, "flair");
  const Volume3D brain = read_volume(run, mask_path, "brain_mask");
  const SegmentationResult seg = segment_flair(spec, flair, brain);
  run.add_timing_ms("normalize", seg.normalize_ms);
  run.add_timing_ms("inference", seg.inference_ms);
  run.add_timing_ms("threshold", seg.threshold_ms);
  const LesionSet lesions = run.timed("lesions", [&] { return label_components(seg.mask, connectivity); });

  json outputs = json::object();
  run.timed("write", [&] {
    if (!out_posterior.empty()) {
      write_nifti_file(out_posterior, seg.posterior);
      outputs["posterior"] = out_posterior.string();
    }
    write_nifti_file(out_mask, seg.mask, NiftiDatatype::Int16);
    outputs["mask"] = out_mask.string();
    if (!lesions_csv.empty()) {
      write_text(lesions_csv, lesion_table_csv(lesions));
      outputs["lesions"] = lesions_csv.string();
    }
  });

  json r = run.report();
  r["wmh_ml"] = seg.wmh_ml;
  r["wmh_voxels"] = count_foreground(seg.mask);
  r["lesion_count"] = lesions.size();
  r["threshold"] = spec.threshold;
  r["outputs"] = outputs;
  return r;
}

fs::path find_volume(const fs::path& dir, std::initializer_list<const char*> stems) {
  for (const char* stem : stems)
    for (const char* ext : {".nii.gz", ".nii"})
      if (fs::path p = dir / (std::string(stem) + ext); fs::is_regular_file(p)) return p;
  fail(ErrorCode::Io, "no " + std::string(*stems.begin()) + " volume in " + dir.string());
}

Outcome segment_batch(const SegmentOptions& o, Run& run, const EnsembleSpec& spec) {
  if (o.out_dir.empty()) fail(ErrorCode::InvalidArgument, "--batch-dir requires --out-dir");
  if (!fs::is_directory(o.batch_dir)) fail(ErrorCode::Io, "not a directory: " + o.batch_dir.string());
  std::vector<fs::path> subjects;
  for (const auto& entry : fs::directory_iterator(o.batch_dir))
    if (entry.is_directory()) subjects.push_back(entry.path());
  std::sort(subjects.begin(), subjects.end());
  fs::create_directories(o.out_dir);

  std::vector<json> results(subjects.size());
  std::vector<int> codes(subjects.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < subjects.size(); i = next++) {
      const std::string id = subjects[i].filename().string();
      Run sub("segment");
      sub.params() = run.params();
      sub.inputs() = run.inputs();
      try {
        const fs::path out = o.out_dir / id;
        fs::create_directories(out);
        json r = segment_subject(sub, spec, find_volume(subjects[i], {"flair"}),
                                 find_volume(subjects[i], {"mask", "brain_mask"}), out / "posterior.nii.gz",
                                 out / "wmh_mask.nii.gz", out / "lesions.csv", o.connectivity);
        write_text(out / "report.json", r.dump(2) + "\n");
        results[i] = {{"id", id},
                      {"status", "ok"},
                      {"wmh_ml", r["wmh_ml"]},
                      {"lesion_count", r["lesion_count"]},
                      {"report", (out / "report.json").string()}};
      } catch (const Error& e) {
        codes[i] = exit_code_for(e.category());
        results[i] = {{"id", id}, {"status", "error"}, {"category", to_string(e.category())}, {"message", e.what()}};
      } catch (const std::exception& e) {
        codes[i] = exit_code_for(ErrorCategory::Io);
        results[i] = {{"id", id}, {"status", "error"}, {"category", "IO"}, {"message", e.what()}};
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(o.jobs, static_cast<unsigned>(subjects.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
  }

  Outcome out;
  out.report = run.report();
  std::size_t failed = 0;
  for (int c : codes) failed += c != 0;
  out.report["subjects"] = results;
  out.report["n_subjects"] = subjects.size();
  out.report["n_failed"] = failed;
  for (int c : codes)
    if (c != 0) {
      out.exit_code = c;
      break;
    }
  return out;
}

struct PairedColumns {
  std::vector<double> a, b;
  std::vector<std::string> ids;
  std::size_t dropped = 0;
};

PairedColumns read_pairs(Run& run, const PairOptions& o) {
  const CsvTable table = parse_csv_table(text_of(run.read_input(o.csv, "csv")));
  const long ia = table.column(o.a), ib = table.column(o.b), iid = table.column("id");
  if (ia < 0) fail(ErrorCode::InvalidArgument, "column '" + o.a + "' not found");
  if (ib < 0) fail(ErrorCode::InvalidArgument, "column '" + o.b + "' not found");
  PairedColumns p;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto cell = [&](long i) -> std::string_view {
      return static_cast<std::size_t>(i) < row.size() ? std::string_view(row[static_cast<std::size_t>(i)]) : "";
    };
    const auto va = parse_csv_number(cell(ia)), vb = parse_csv_number(cell(ib));
    if (!va || !vb) {
      ++p.dropped;
      continue;
    }
    p.a.push_back(*va);
    p.b.push_back(*vb);
    p.ids.push_back(iid >= 0 ? std::string(cell(iid)) : std::to_string(r + 1));
  }
  return p;
}

std::vector<SubjectRecord> read_cohort(Run& run, const fs::path& path, Outcome& out) {
  return run.timed("parse", [&] { return parse_cohort_csv(text_of(run.read_input(path, "cohort")), &out.warnings); });
}

json range_json(const RangeSummary& r) {
  json j = {{"n", r.n}};
  if (r.n) {
    j["mean"] = r.mean;
    j["min"] = r.min;
    j["max"] = r.max;
  }
  return j;
}

}  // namespace

Outcome cmd_segment(const SegmentOptions& o) {
  Run run("segment");
  run.params() = {{"threshold", o.threshold},
                  {"tile", o.tile},
                  {"overlap", o.overlap},
                  {"connectivity", o.connectivity},
                  {"jobs", o.jobs}};
  EnsembleSpec spec = run.timed("load_weights", [&] { return load_ensemble(run, o.weights); });
  spec.threshold = o.threshold;
  spec.tiling = tiling_from(o.tile, o.overlap);
  spec.validate();

  if (!o.batch_dir.empty()) return segment_batch(o, run, spec);
  if (o.flair.empty() || o.mask.empty() || o.out_mask.empty())
    fail(ErrorCode::InvalidArgument, "segment needs --flair, --mask and --out-mask (or --batch-dir)");
  return {segment_subject(run, spec, o.flair, o.mask, o.out_posterior, o.out_mask, o.lesions_csv, o.connectivity)};
}

Outcome cmd_baseline(const BaselineOptions& o) {
  Run run("baseline");
  run.params() = {{"alpha", o.alpha}, {"bins", o.bins}, {"connectivity", o.connectivity}};
  const Volume3D flair = read_volume(run, o.flair, "flair");
  const Volume3D brain = read_volume(run, o.mask, "brain_mask");
  const HistParams hp{o.alpha, o.bins};
  const HistogramFit fit = run.timed("fit", [&] { return fit_histogram_mode(flair, brain, hp); });
  const Volume3D seg = run.timed("threshold", [&] { return histogram_segment(flair, brain, hp); });
  const LesionSet lesions = run.timed("lesions", [&] { return label_components(seg, o.connectivity); });
  run.timed("write", [&] { write_nifti_file(o.out_mask, seg, NiftiDatatype::Int16); });

  Outcome out{run.report()};
  out.report["intensity_threshold"] = fit.threshold;
  out.report["mode_mean"] = fit.mode_mean;
  out.report["mode_sd"] = fit.mode_sd;
  out.report["wmh_ml"] = wmh_volume_ml(seg);
  out.report["wmh_voxels"] = count_foreground(seg);
  out.report["lesion_count"] = lesions.size();
  out.report["outputs"] = {{"mask", o.out_mask.string()}};
  return out;
}

Outcome cmd_evaluate(const EvaluateOptions& o) {
  Run run("evaluate");
  run.params() = {{"connectivity", o.connectivity}};
  if (!o.pr_tsv.empty() && o.posterior.empty()) fail(ErrorCode::InvalidArgument, "--pr-tsv requires --posterior");
  const Volume3D pred = read_volume(run, o.pred, "pred");
  const Volume3D gt = read_volume(run, o.gt, "gt");
  std::optional<Volume3D> posterior, mask;
  if (!o.posterior.empty()) posterior = read_volume(run, o.posterior, "posterior");
  if (!o.mask.empty()) mask = read_volume(run, o.mask, "brain_mask");

  const MetricReport m = run.timed("metrics", [&] {
    return evaluate_segmentation(pred, gt, posterior ? &*posterior : nullptr, mask ? &*mask : nullptr,
                                 o.connectivity);
  });
  Outcome out{run.report()};
  auto& r = out.report;
  r["dice_pixel"] = m.dice_pixel;
  r["dice_lesion"] = m.dice_lesion;
  if (m.avd_percent) r["avd_percent"] = *m.avd_percent;
  if (m.auc_pr) r["auc_pr"] = *m.auc_pr;
  r["voxels"] = {{"tp", m.voxels.tp}, {"fp", m.voxels.fp}, {"fn", m.voxels.fn}};
  r["lesions"] = {{"tp", m.tp_lesions}, {"fp", m.fp_lesions}, {"fn", m.fn_lesions}};
  r["pred_ml"] = m.pred_ml;
  r["gt_ml"] = m.gt_ml;
  if (!o.pr_tsv.empty()) {
    const Volume3D everywhere = gt.like(1.0f);
    const PrCurve curve = pr_curve_auc(*posterior, gt, mask ? *mask : everywhere);
    write_text(o.pr_tsv, pr_curve_tsv(curve));
    r["outputs"] = {{"pr_curve", o.pr_tsv.string()}};
  }
  return out;
}

Outcome cmd_agree(const PairOptions& o) {
  Run run("agree");
  run.params() = {{"a", o.a}, {"b", o.b}};
  const PairedColumns p = read_pairs(run, o);
  const BlandAltmanResult ba = run.timed("bland_altman", [&] { return bland_altman(p.a, p.b); });
  Outcome out{run.report()};
  auto& r = out.report;
  r["n"] = ba.n;
  r["n_dropped"] = p.dropped;
  r["bias"] = ba.bias;
  r["sd_diff"] = ba.sd_diff;
  r["loa_low"] = ba.loa_low;
  r["loa_high"] = ba.loa_high;
  r["grand_mean"] = ba.grand_mean;
  r["cv_percent"] = ba.cv_percent;
  r["rpc_percent"] = ba.rpc_percent;
  r["r_squared"] = ba.r_squared;
  if (!o.points_tsv.empty()) {
    std::string tsv = "id\tmean\tdifference\n";
    for (std::size_t i = 0; i < ba.points.size(); ++i)
      tsv += p.ids[i] + "\t" + num(ba.points[i].mean) + "\t" + num(ba.points[i].difference) + "\n";
    write_text(o.points_tsv, tsv);
    r["outputs"] = {{"points", o.points_tsv.string()}};
  }
  return out;
}

Outcome cmd_ttest(const PairOptions& o) {
  Run run("ttest");
  run.params() = {{"a", o.a}, {"b", o.b}};
  const PairedColumns p = read_pairs(run, o);
  const TTestResult t = run.timed("ttest", [&] { return paired_ttest(p.a, p.b); });
  Outcome out{run.report()};
  auto& r = out.report;
  r["n"] = p.a.size();
  r["n_dropped"] = p.dropped;
  // JSON has no infinity; a degenerate test reports t as null with the flag set.
  r["t"] = std::isfinite(t.t) ? json(t.t) : json(nullptr);
  r["df"] = t.df;
  r["p"] = t.p;
  r["mean_diff"] = t.mean_diff;
  r["sd_diff"] = t.sd_diff;
  r["degenerate"] = t.degenerate;
  return out;
}

Outcome cmd_regress(const RegressOptions& o) {
  Run run("regress");
  Outcome out;
  const auto outcome = parse_field(o.outcome);
  const auto exposure = parse_field(o.exposure);
  if (!outcome) fail(ErrorCode::InvalidArgument, "unknown outcome field '" + o.outcome + "'");
  if (!exposure) fail(ErrorCode::InvalidArgument, "unknown exposure field '" + o.exposure + "'");

  std::vector<Covariate> covariates = default_covariates();
  if (o.covariates) {
    covariates.clear();
    std::string_view list = *o.covariates;
    if (list != "none") {
      while (!list.empty()) {
        const auto comma = list.find(',');
        const std::string_view name = list.substr(0, comma);
        const auto c = parse_covariate(name);
        if (!c) fail(ErrorCode::InvalidArgument, "unknown covariate '" + std::string(name) + "'");
        covariates.push_back(*c);
        list = comma == std::string_view::npos ? std::string_view{} : list.substr(comma + 1);
      }
    }
  }
  json cov_names = json::array();
  for (Covariate c : covariates) cov_names.push_back(to_string(c));
  run.params() = {{"outcome", to_string(*outcome)},
                  {"exposure", to_string(*exposure)},
                  {"covariates", cov_names},
                  {"log10_exposure", o.log10_exposure}};

  const auto records = read_cohort(run, o.cohort, out);
  const DesignMatrix design = run.timed("design", [&] {
    return build_design_matrix(records, *outcome, *exposure, covariates, DesignOptions{o.log10_exposure});
  });
  const RegressionResult fit = run.timed("ols", [&] { return ols_regress(design); });

  out.report = run.report();
  auto& r = out.report;
  json coefs = json::array();
  for (std::size_t i = 0; i < fit.names.size(); ++i)
    coefs.push_back({{"name", fit.names[i]},
                     {"estimate", fit.estimates[i]},
                     {"std_error", fit.std_errors[i]},
                     {"t", std::isfinite(fit.t_statistics[i]) ? json(fit.t_statistics[i]) : json(nullptr)},
                     {"p", fit.p_values[i]}});
  r["coefficients"] = coefs;
  r["r_squared"] = fit.r_squared;
  r["rss"] = fit.rss;
  r["df_resid"] = fit.df_resid;
  r["n_used"] = fit.n_used;
  r["n_dropped"] = fit.n_dropped;
  r["exact_fit"] = fit.exact_fit;
  if (!out.warnings.empty()) r["warnings"] = out.warnings;
  return out;
}

Outcome cmd_cohort_summary(const SummaryOptions& o) {
  if (o.format != "json" && o.format != "text") fail(ErrorCode::InvalidArgument, "--format must be json or text");
  Run run("cohort-summary");
  run.params() = {{"format", o.format}};
  Outcome out;
  const auto records = read_cohort(run, o.cohort, out);
  const CohortSummary s = run.timed("summarize", [&] { return summarize(records); });
  out.report = run.report();
  auto& r = out.report;
  json groups = json::array();
  for (const GroupSummary& g : s.groups)
    groups.push_back({{"diagnosis", to_string(g.diagnosis)},
                      {"n", g.n},
                      {"female", g.female},
                      {"male", g.male},
                      {"age", range_json(g.age)},
                      {"education", range_json(g.education)}});
  r["groups"] = groups;
  r["n"] = s.n;
  if (!out.warnings.empty()) r["warnings"] = out.warnings;
  if (o.format == "text") r["table"] = format_summary_table(s);
  return out;
}

Outcome cmd_phantom(const PhantomOptions& o) {
  if (o.out_dir.empty()) fail(ErrorCode::InvalidArgument, "phantom needs --out-dir");
  Run run("phantom");
  run.params() = {{"seed", o.seed}, {"size", o.size}};
  const Phantom ph = run.timed("generate", [&] { return make_phantom(o.seed, {o.size, o.size, o.size}); });
  json files;
  run.timed("write", [&] {
    fs::create_directories(o.out_dir);
    write_nifti_file(o.out_dir / "flair.nii.gz", ph.flair);
    write_nifti_file(o.out_dir / "brain_mask.nii.gz", ph.brain_mask, NiftiDatatype::Int16);
    write_nifti_file(o.out_dir / "gt.nii.gz", ph.ground_truth, NiftiDatatype::Int16);
    write_file_bytes(o.out_dir / "ensemble.sgwt", save_networks(ph.ensemble.tagged_networks()));
    files = {{"flair", (o.out_dir / "flair.nii.gz").string()},
             {"brain_mask", (o.out_dir / "brain_mask.nii.gz").string()},
             {"gt", (o.out_dir / "gt.nii.gz").string()},
             {"weights", (o.out_dir / "ensemble.sgwt").string()}};
  });
  Outcome out{run.report()};
  out.report["standardized_threshold"] = ph.threshold;
  out.report["gt_voxels"] = count_foreground(ph.ground_truth);
  out.report["gt_ml"] = wmh_volume_ml(ph.ground_truth);
  out.report["gt_lesions"] = label_components(ph.ground_truth).size();
  out.report["outputs"] = files;
  return out;
}

}  // namespace wmh::cli

#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wmh/subject.hpp"

namespace wmh {

/// Column names of the cohort CSV, in the order write_cohort_csv emits them.
inline constexpr std::array<std::string_view, 12> kCohortColumns{
    "id",     "age",    "sex",      "education",       "apoe4",          "diagnosis",
    "icv_ml", "wmh_stackgen_ml", "wmh_adni_ml", "adni_ef", "adni_mem", "adni_lan"};

/// Raw CSV cells: RFC 4180 quoting, CRLF or LF line ends, optional UTF-8 BOM, blank lines skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Case-insensitive header lookup; -1 when absent.
  long column(std::string_view name) const;
};

CsvTable parse_csv_table(std::string_view text);

/// Whole-cell decimal number (surrounding spaces allowed); nullopt if empty, partial or non-finite.
std::optional<double> parse_csv_number(std::string_view cell);

/// Parses a UTF-8 cohort CSV. Header matching is case-insensitive; `id` and `diagnosis` are
/// required, other columns optional and unknown columns ignored. Unparseable or out-of-range
/// numeric cells become missing and add a message to `warnings` (when given).
///
/// Errors: MissingHeader, UnknownDiagnosis, DuplicateId.
std::vector<SubjectRecord> parse_cohort_csv(std::string_view text, std::vector<std::string>* warnings = nullptr);

/// Writes every column; missing values are empty cells. Numbers use shortest round-trip form.
std::string write_cohort_csv(std::span<const SubjectRecord> records);

struct RangeSummary {
  std::size_t n = 0;  // records with the field present
  double mean = 0.0, min = 0.0, max = 0.0;
};

struct GroupSummary {
  Diagnosis diagnosis = Diagnosis::CN;
  std::size_t n = 0;
  RangeSummary age;
  std::size_t female = 0, male = 0;
  RangeSummary education;
};

struct CohortSummary {
  std::array<GroupSummary, 3> groups;  // CN, MCI, AD
  std::size_t n = 0;

  const GroupSummary& group(Diagnosis d) const noexcept { return groups[static_cast<std::size_t>(d)]; }
};

/// Per-diagnosis demographics. Throws EmptyCohort; records without a diagnosis are rejected.
CohortSummary summarize(std::span<const SubjectRecord> records);

/// Aligned text rendering: N, Age (years) mean (min-max), Gender nF, nM, Education mean (min-max).
std::string format_summary_table(const CohortSummary& s);

}  // namespace wmh

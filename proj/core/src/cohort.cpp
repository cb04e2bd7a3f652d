#include "wmh/cohort.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "wmh/error.hpp"

namespace wmh {

std::string_view to_string(Sex s) noexcept { return s == Sex::F ? "F" : "M"; }

std::string_view to_string(Diagnosis d) noexcept {
  switch (d) {
    case Diagnosis::CN: return "CN";
    case Diagnosis::MCI: return "MCI";
    case Diagnosis::AD: return "AD";
  }
  return "?";
}

std::string_view to_string(Field f) noexcept {
  switch (f) {
    case Field::Age: return "age";
    case Field::Education: return "education";
    case Field::Apoe4: return "apoe4";
    case Field::Icv: return "icv_ml";
    case Field::WmhStackgen: return "wmh_stackgen_ml";
    case Field::WmhAdni: return "wmh_adni_ml";
    case Field::AdniEf: return "adni_ef";
    case Field::AdniMem: return "adni_mem";
    case Field::AdniLan: return "adni_lan";
  }
  return "?";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// RFC 4180-style splitting with quoted fields; returns rows of cells.
std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF && static_cast<unsigned char>(text[1]) == 0xBB &&
      static_cast<unsigned char>(text[2]) == 0xBF)
    text.remove_prefix(3);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cell.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
      }
      row.clear();
      cell.clear();
      any = false;
    } else {
      cell += c;
      any = true;
    }
  }
  if (any || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

CsvTable parse_csv_table(std::string_view text) {
  auto rows = split_csv(text);
  CsvTable t;
  if (rows.empty()) return t;
  t.header = std::move(rows.front());
  for (auto& h : t.header) h = std::string(trim(h));
  t.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
  return t;
}

std::optional<double> parse_csv_number(std::string_view cell) { return parse_number(cell); }

long CsvTable::column(std::string_view name) const {
  const std::string want = lower(trim(name));
  for (std::size_t i = 0; i < header.size(); ++i)
    if (lower(header[i]) == want) return static_cast<long>(i);
  return -1;
}

std::optional<Field> parse_field(std::string_view name) noexcept {
  const std::string n = lower(trim(name));
  for (Field f : {Field::Age, Field::Education, Field::Apoe4, Field::Icv, Field::WmhStackgen, Field::WmhAdni,
                  Field::AdniEf, Field::AdniMem, Field::AdniLan})
    if (n == to_string(f)) return f;
  if (n == "icv") return Field::Icv;
  if (n == "wmh_stackgen") return Field::WmhStackgen;
  if (n == "wmh_adni") return Field::WmhAdni;
  return std::nullopt;
}

std::optional<double> field_value(const SubjectRecord& r, Field f) noexcept {
  switch (f) {
    case Field::Age: return r.age;
    case Field::Education: return r.education;
    case Field::Apoe4: return r.apoe4 ? std::optional<double>(*r.apoe4) : std::nullopt;
    case Field::Icv: return r.icv_ml;
    case Field::WmhStackgen: return r.wmh_stackgen_ml;
    case Field::WmhAdni: return r.wmh_adni_ml;
    case Field::AdniEf: return r.adni_ef;
    case Field::AdniMem: return r.adni_mem;
    case Field::AdniLan: return r.adni_lan;
  }
  return std::nullopt;
}

std::vector<SubjectRecord> parse_cohort_csv(std::string_view text, std::vector<std::string>* warnings) {
  const auto rows = split_csv(text);
  if (rows.empty()) fail(ErrorCode::MissingHeader, "empty cohort file");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].size(); ++i) col.emplace(lower(trim(rows[0][i])), i);
  if (!col.contains("id") || !col.contains("diagnosis"))
    fail(ErrorCode::MissingHeader, "header must contain 'id' and 'diagnosis' columns");

  auto warn = [&](std::size_t line, std::string_view column, const std::string& what) {
    if (warnings) warnings->push_back("line " + std::to_string(line) + ", " + std::string(column) + ": " + what);
  };

  std::vector<SubjectRecord> records;
  std::set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    auto cell = [&](std::string_view name) -> std::string_view {
      const auto it = col.find(std::string(name));
      if (it == col.end() || it->second >= row.size()) return {};
      return trim(row[it->second]);
    };
    auto number = [&](std::string_view name, auto valid) -> std::optional<double> {
      const std::string_view s = cell(name);
      if (s.empty()) return std::nullopt;
      const auto v = parse_number(s);
      if (!v) {
        warn(line, name, "unparseable value '" + std::string(s) + "'");
        return std::nullopt;
      }
      if (!valid(*v)) {
        warn(line, name, "out-of-range value '" + std::string(s) + "'");
        return std::nullopt;
      }
      return v;
    };
    auto any = [](double) { return true; };
    auto positive = [](double v) { return v > 0.0; };
    auto non_negative = [](double v) { return v >= 0.0; };

    SubjectRecord rec;
    rec.id = std::string(cell("id"));
    if (rec.id.empty()) fail(ErrorCode::MissingHeader, "line " + std::to_string(line) + ": empty id");
    if (!ids.insert(rec.id).second) fail(ErrorCode::DuplicateId, "duplicate subject id '" + rec.id + "'");

    const std::string dx = lower(cell("diagnosis"));
    if (dx == "cn") rec.diagnosis = Diagnosis::CN;
    else if (dx == "mci") rec.diagnosis = Diagnosis::MCI;
    else if (dx == "ad" || dx == "dementia") rec.diagnosis = Diagnosis::AD;
    else
      fail(ErrorCode::UnknownDiagnosis,
           "line " + std::to_string(line) + ": unknown diagnosis '" + std::string(cell("diagnosis")) + "'");

    if (const std::string sx = lower(cell("sex")); !sx.empty()) {
      if (sx == "f" || sx == "female") rec.sex = Sex::F;
      else if (sx == "m" || sx == "male") rec.sex = Sex::M;
      else warn(line, "sex", "unrecognized value '" + sx + "'");
    }
    rec.age = number("age", positive);
    rec.education = number("education", non_negative);
    if (const auto a = number("apoe4", [](double v) { return v == 0.0 || v == 1.0 || v == 2.0; }))
      rec.apoe4 = static_cast<int>(*a);
    rec.icv_ml = number("icv_ml", positive);
    rec.wmh_stackgen_ml = number("wmh_stackgen_ml", non_negative);
    rec.wmh_adni_ml = number("wmh_adni_ml", non_negative);
    rec.adni_ef = number("adni_ef", any);
    rec.adni_mem = number("adni_mem", any);
    rec.adni_lan = number("adni_lan", any);
    records.push_back(std::move(rec));
  }
  return records;
}

std::string write_cohort_csv(std::span<const SubjectRecord> records) {
  std::string out;
  for (std::size_t i = 0; i < kCohortColumns.size(); ++i) {
    if (i) out += ',';
    out += kCohortColumns[i];
  }
  out += '\n';
  auto num = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const SubjectRecord& r : records) {
    out += csv_escape(r.id);
    out += ',' + num(r.age);
    out += ',' + (r.sex ? std::string(to_string(*r.sex)) : std::string());
    out += ',' + num(r.education);
    out += ',' + (r.apoe4 ? std::to_string(*r.apoe4) : std::string());
    out += ',' + (r.diagnosis ? std::string(to_string(*r.diagnosis)) : std::string());
    out += ',' + num(r.icv_ml);
    out += ',' + num(r.wmh_stackgen_ml);
    out += ',' + num(r.wmh_adni_ml);
    out += ',' + num(r.adni_ef);
    out += ',' + num(r.adni_mem);
    out += ',' + num(r.adni_lan);
    out += '\n';
  }
  return out;
}

namespace {

RangeSummary range_of(std::vector<double> values) {
  RangeSummary s;
  if (values.empty()) return s;
  // Sorted summation keeps the mean independent of row order.
  std::sort(values.begin(), values.end());
  s.n = values.size();
  s.min = values.front();
  s.max = values.back();
  double sum = 0.0;
  for (double v : values) sum += v;
  // Rounding can push a constant field's mean one ulp outside [min, max].
  s.mean = std::clamp(sum / static_cast<double>(s.n), s.min, s.max);
  return s;
}

std::string range_text(const RangeSummary& s, int decimals) {
  if (s.n == 0) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << s.mean << " (" << std::setprecision(0) << s.min << "-" << s.max
     << ")";
  return os.str();
}

}  // namespace

CohortSummary summarize(std::span<const SubjectRecord> records) {
  if (records.empty()) fail(ErrorCode::EmptyCohort, "no records to summarize");
  CohortSummary s;
  std::array<std::vector<double>, 3> ages, educations;
  for (std::size_t i = 0; i < 3; ++i) s.groups[i].diagnosis = static_cast<Diagnosis>(i);
  for (const SubjectRecord& r : records) {
    if (!r.diagnosis) fail(ErrorCode::InvalidArgument, "record '" + r.id + "' has no diagnosis");
    const auto g = static_cast<std::size_t>(*r.diagnosis);
    ++s.groups[g].n;
    ++s.n;
    if (r.age) ages[g].push_back(*r.age);
    if (r.education) educations[g].push_back(*r.education);
    if (r.sex == Sex::F) ++s.groups[g].female;
    if (r.sex == Sex::M) ++s.groups[g].male;
  }
  for (std::size_t g = 0; g < 3; ++g) {
    s.groups[g].age = range_of(std::move(ages[g]));
    s.groups[g].education = range_of(std::move(educations[g]));
  }
  return s;
}

std::string format_summary_table(const CohortSummary& s) {
  std::ostringstream os;
  constexpr int label_w = 14, col_w = 16;
  os << std::left << std::setw(label_w) << "";
  for (const auto& g : s.groups) os << std::setw(col_w) << to_string(g.diagnosis);
  os << "\n" << std::setw(label_w) << "N";
  for (const auto& g : s.groups) os << std::setw(col_w) << g.n;
  os << "\n" << std::setw(label_w) << "Age (years)";
  for (const auto& g : s.groups) os << std::setw(col_w) << range_text(g.age, 0);
  os << "\n" << std::setw(label_w) << "Gender";
  for (const auto& g : s.groups)
    os << std::setw(col_w) << (std::to_string(g.female) + "F, " + std::to_string(g.male) + "M");
  os << "\n" << std::setw(label_w) << "Education";
  for (const auto& g : s.groups) os << std::setw(col_w) << range_text(g.education, 1);
  os << "\n" << std::setw(label_w) << "Total" << s.n << "\n";
  return os.str();
}

}  // namespace wmh

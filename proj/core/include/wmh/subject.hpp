#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace wmh {

enum class Sex { F, M };
enum class Diagnosis { CN, MCI, AD };

std::string_view to_string(Sex s) noexcept;
std::string_view to_string(Diagnosis d) noexcept;

/// One cohort row. Every field except `id` may be missing.
struct SubjectRecord {
  std::string id;
  std::optional<double> age;        // years
  std::optional<Sex> sex;
  std::optional<double> education;  // years
  std::optional<int> apoe4;         // allele count 0..2
  std::optional<Diagnosis> diagnosis;
  std::optional<double> icv_ml;
  std::optional<double> wmh_stackgen_ml;
  std::optional<double> wmh_adni_ml;
  std::optional<double> adni_ef;
  std::optional<double> adni_mem;
  std::optional<double> adni_lan;

  friend bool operator==(const SubjectRecord&, const SubjectRecord&) = default;
};

/// Numeric record fields usable as regression outcome or exposure.
enum class Field { Age, Education, Apoe4, Icv, WmhStackgen, WmhAdni, AdniEf, AdniMem, AdniLan };

std::string_view to_string(Field f) noexcept;
/// Accepts the CSV column names (e.g. "wmh_stackgen_ml", "adni_ef"); case-insensitive.
std::optional<Field> parse_field(std::string_view name) noexcept;
std::optional<double> field_value(const SubjectRecord& r, Field f) noexcept;

}  // namespace wmh

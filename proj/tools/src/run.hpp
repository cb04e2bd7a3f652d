#pragma once

// Per-invocation bookkeeping shared by all subcommands: input digests, resolved parameters and
// stage timings, emitted as the manifest embedded in every report.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace wmh::cli {

using json = nlohmann::ordered_json;

std::string sha256_hex(std::span<const std::uint8_t> bytes);

class Run {
 public:
  explicit Run(std::string subcommand);

  /// Reads a file and records its digest under `role`.
  std::vector<std::uint8_t> read_input(const std::filesystem::path& path, std::string_view role);

  json& params() noexcept { return params_; }
  json& inputs() noexcept { return inputs_; }

  template <class F>
  decltype(auto) timed(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      Run& run;
      const std::string& stage;
      std::chrono::steady_clock::time_point start;
      ~Record() { run.add_timing(stage, std::chrono::steady_clock::now() - start); }
    } record{*this, stage, start};
    return f();
  }

  void add_timing(const std::string& stage, std::chrono::steady_clock::duration d);
  void add_timing_ms(const std::string& stage, double ms);

  json manifest() const;
  /// {"manifest": ...} with the manifest first.
  json report() const;

 private:
  std::string subcommand_;
  json params_ = json::object();
  json inputs_ = json::array();
  json timings_ = json::object();
};

}  // namespace wmh::cli

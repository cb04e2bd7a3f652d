#include "run.hpp"

#include <openssl/evp.h>

#include "wmh/error.hpp"
#include "wmh/volume_io.hpp"

#ifndef WMH_VERSION
#define WMH_VERSION "0.0.0"
#endif

namespace wmh::cli {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::Io, "SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

Run::Run(std::string subcommand) : subcommand_(std::move(subcommand)) {}

std::vector<std::uint8_t> Run::read_input(const std::filesystem::path& path, std::string_view role) {
  auto bytes = read_file_bytes(path);
  inputs_.push_back({{"role", role}, {"path", path.string()}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  return bytes;
}

void Run::add_timing(const std::string& stage, std::chrono::steady_clock::duration d) {
  add_timing_ms(stage, std::chrono::duration<double, std::milli>(d).count());
}

void Run::add_timing_ms(const std::string& stage, double ms) {
  if (timings_.contains(stage)) ms += timings_[stage].get<double>();
  timings_[stage] = ms;
}

json Run::manifest() const {
  return json{{"tool", "wmhq"},
              {"version", WMH_VERSION},
              {"subcommand", subcommand_},
              {"params", params_},
              {"inputs", inputs_},
              {"timings_ms", timings_}};
}

json Run::report() const { return json{{"manifest", manifest()}}; }

}  // namespace wmh::cli

#pragma once

// NIfTI-1 reading/writing and brain-masked intensity standardization.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wmh/volume.hpp"

namespace wmh {

/// On-disk scalar types accepted by parse_nifti.
enum class NiftiDatatype : std::int16_t {
  UInt8 = 2,
  Int16 = 4,
  Float32 = 16,
  Float64 = 64,
};

inline constexpr std::size_t kNiftiHeaderSize = 348;
inline constexpr std::size_t kNiftiVoxOffset = 352;

/// Parses a single-file NIfTI-1 volume (.nii), transparently gunzipping .nii.gz payloads.
///
/// Errors: BadMagic, UnsupportedDim, UnsupportedDatatype, TruncatedData, BadGzip, InvalidHeader.
Volume3D parse_nifti(std::span<const std::uint8_t> bytes);

struct NiftiWriteOptions {
  bool compress = false;
  /// Float32 for intensities and posteriors; Int16 for label maps (values must be integral).
  NiftiDatatype datatype = NiftiDatatype::Float32;
};

/// Serializes `v` as NIfTI-1 with sform set from spacing and orientation and qform_code 0.
std::vector<std::uint8_t> write_nifti(const Volume3D& v, bool compress = false);
std::vector<std::uint8_t> write_nifti(const Volume3D& v, const NiftiWriteOptions& options);

Volume3D read_nifti_file(const std::filesystem::path& path);
/// Compresses when the path ends with ".gz".
void write_nifti_file(const std::filesystem::path& path, const Volume3D& v,
                      NiftiDatatype datatype = NiftiDatatype::Float32);

/// Z-scores voxels inside `mask` using the in-mask mean and population SD; zero outside.
/// Throws DegenerateMask for fewer than two in-mask voxels or zero variance.
Volume3D normalize_intensity(const Volume3D& v, const Volume3D& mask);

// gzip (RFC 1952) helpers, backed by zlib.
bool is_gzip(std::span<const std::uint8_t> bytes) noexcept;
std::vector<std::uint8_t> gzip_compress(std::span<const std::uint8_t> bytes);
/// Throws BadGzip on malformed input.
std::vector<std::uint8_t> gzip_decompress(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace wmh

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "wmh/error.hpp"
#include "wmh/volume_io.hpp"

namespace wmh {
namespace {

// Byte offsets into the 348-byte NIfTI-1 header.
namespace off {
constexpr std::size_t sizeof_hdr = 0;
constexpr std::size_t dim = 40;
constexpr std::size_t datatype = 70;
constexpr std::size_t bitpix = 72;
constexpr std::size_t pixdim = 76;
constexpr std::size_t vox_offset = 108;
constexpr std::size_t scl_slope = 112;
constexpr std::size_t scl_inter = 116;
constexpr std::size_t xyzt_units = 123;
constexpr std::size_t descrip = 148;
constexpr std::size_t qform_code = 252;
constexpr std::size_t sform_code = 254;
constexpr std::size_t quatern_b = 256;
constexpr std::size_t srow_x = 280;
constexpr std::size_t magic = 344;
}  // namespace off

// Upper bound on voxels we will allocate for, independent of what the header claims.
constexpr std::uint64_t kMaxVoxels = std::uint64_t{1} << 31;

template <typename T>
T byteswap_value(T v) noexcept {
  std::array<std::uint8_t, sizeof(T)> b;
  std::memcpy(b.data(), &v, sizeof(T));
  std::reverse(b.begin(), b.end());
  std::memcpy(&v, b.data(), sizeof(T));
  return v;
}

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, bool swap) : bytes_(bytes), swap_(swap) {}

  template <typename T>
  T get(std::size_t offset) const {
    T v;
    std::memcpy(&v, bytes_.data() + offset, sizeof(T));
    return swap_ ? byteswap_value(v) : v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  bool swap_;
};

template <typename T>
void put(std::vector<std::uint8_t>& buf, std::size_t offset, T v) {
  static_assert(std::endian::native == std::endian::little, "writer assumes a little-endian host");
  std::memcpy(buf.data() + offset, &v, sizeof(T));
}

std::size_t bytes_per_voxel(NiftiDatatype dt) {
  switch (dt) {
    case NiftiDatatype::UInt8: return 1;
    case NiftiDatatype::Int16: return 2;
    case NiftiDatatype::Float32: return 4;
    case NiftiDatatype::Float64: return 8;
  }
  return 0;
}

using Mat3 = std::array<std::array<double, 3>, 3>;

// Snap each voxel axis (column) to the closest signed world axis, keeping the three distinct.
Orientation orientation_from_matrix(const Mat3& m) {
  std::array<double, 3> norms{};
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) {
      if (!std::isfinite(m[i][j])) fail(ErrorCode::InvalidHeader, "non-finite orientation matrix");
      norms[j] += m[i][j] * m[i][j];
    }
    norms[j] = std::sqrt(norms[j]);
    if (norms[j] == 0.0) fail(ErrorCode::InvalidHeader, "degenerate orientation matrix");
  }
  std::array<int, 3> perm{0, 1, 2}, best{0, 1, 2};
  double best_score = -1.0;
  do {
    double score = 0.0;
    for (int j = 0; j < 3; ++j) score += std::abs(m[perm[j]][j]) / norms[j];
    if (score > best_score) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  Orientation o;
  for (int j = 0; j < 3; ++j) o.axes[j] = make_axis(best[j], m[best[j]][j] < 0.0 ? -1 : 1);
  return o;
}

Mat3 quaternion_matrix(double b, double c, double d, double qfac) {
  double a = 1.0 - (b * b + c * c + d * d);
  if (a < 1e-7) {
    // 180 degree rotation; renormalize (b, c, d) as nifti1_io does.
    const double s = 1.0 / std::sqrt(b * b + c * c + d * d);
    b *= s;
    c *= s;
    d *= s;
    a = 0.0;
  } else {
    a = std::sqrt(a);
  }
  Mat3 r{{{a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)},
          {2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)},
          {2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b}}};
  for (int i = 0; i < 3; ++i) r[i][2] *= qfac;
  return r;
}

}  // namespace

Volume3D parse_nifti(std::span<const std::uint8_t> input) {
  std::vector<std::uint8_t> inflated;
  std::span<const std::uint8_t> bytes = input;
  if (is_gzip(input)) {
    inflated = gzip_decompress(input);
    bytes = inflated;
  }

  if (bytes.size() < kNiftiHeaderSize)
    fail(ErrorCode::TruncatedData, "file shorter than the 348-byte header");
  if (std::memcmp(bytes.data() + off::magic, "n+1\0", 4) != 0)
    fail(ErrorCode::BadMagic, "magic is not \"n+1\"");

  // Endianness: dim[0] must be in 1..7 in the file's byte order.
  bool swap = false;
  {
    const auto dim0 = ByteReader(bytes, false).get<std::int16_t>(off::dim);
    if (dim0 < 1 || dim0 > 7) {
      const auto swapped = ByteReader(bytes, true).get<std::int16_t>(off::dim);
      if (swapped < 1 || swapped > 7) fail(ErrorCode::InvalidHeader, "dim[0] out of range in either byte order");
      swap = true;
    }
  }
  const ByteReader hdr(bytes, swap);

  if (hdr.get<std::int16_t>(off::dim) != 3)
    fail(ErrorCode::UnsupportedDim, "only 3D volumes are supported (dim[0] = " +
                                        std::to_string(hdr.get<std::int16_t>(off::dim)) + ")");
  if (hdr.get<std::int32_t>(off::sizeof_hdr) != 348) fail(ErrorCode::InvalidHeader, "sizeof_hdr is not 348");

  const auto dt_code = hdr.get<std::int16_t>(off::datatype);
  NiftiDatatype dt;
  switch (dt_code) {
    case 2: dt = NiftiDatatype::UInt8; break;
    case 4: dt = NiftiDatatype::Int16; break;
    case 16: dt = NiftiDatatype::Float32; break;
    case 64: dt = NiftiDatatype::Float64; break;
    default: fail(ErrorCode::UnsupportedDatatype, "datatype code " + std::to_string(dt_code));
  }

  Dims dims{};
  std::uint64_t voxels = 1;
  for (int i = 0; i < 3; ++i) {
    const auto d = hdr.get<std::int16_t>(off::dim + 2 * (i + 1));
    if (d < 1) fail(ErrorCode::InvalidHeader, "non-positive dim[" + std::to_string(i + 1) + "]");
    dims[i] = static_cast<std::size_t>(d);
    voxels *= static_cast<std::uint64_t>(d);
  }
  if (voxels > kMaxVoxels) fail(ErrorCode::InvalidHeader, "volume too large");

  Spacing spacing{};
  for (int i = 0; i < 3; ++i) {
    const double p = std::abs(static_cast<double>(hdr.get<float>(off::pixdim + 4 * (i + 1))));
    if (!(p > 0.0) || !std::isfinite(p)) fail(ErrorCode::InvalidHeader, "non-positive pixdim");
    spacing[i] = p;
  }

  const double vox_offset = hdr.get<float>(off::vox_offset);
  if (!std::isfinite(vox_offset) || vox_offset < static_cast<double>(kNiftiHeaderSize) ||
      vox_offset != std::floor(vox_offset) || vox_offset > 1e12)
    fail(ErrorCode::InvalidHeader, "bad vox_offset");
  const auto data_start = static_cast<std::uint64_t>(vox_offset);
  const std::uint64_t data_bytes = voxels * bytes_per_voxel(dt);
  if (data_start + data_bytes > bytes.size())
    fail(ErrorCode::TruncatedData, "payload shorter than header promises (" + std::to_string(bytes.size()) +
                                       " < " + std::to_string(data_start + data_bytes) + " bytes)");

  Orientation orientation = Orientation::ras();
  const auto sform_code = hdr.get<std::int16_t>(off::sform_code);
  const auto qform_code = hdr.get<std::int16_t>(off::qform_code);
  if (sform_code > 0) {
    Mat3 m{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] = hdr.get<float>(off::srow_x + 16 * i + 4 * j);
    orientation = orientation_from_matrix(m);
  } else if (qform_code > 0) {
    const double qfac = hdr.get<float>(off::pixdim) < 0.0f ? -1.0 : 1.0;
    const double b = hdr.get<float>(off::quatern_b);
    const double c = hdr.get<float>(off::quatern_b + 4);
    const double d = hdr.get<float>(off::quatern_b + 8);
    if (!std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d))
      fail(ErrorCode::InvalidHeader, "non-finite quaternion");
    orientation = orientation_from_matrix(quaternion_matrix(b, c, d, qfac));
  }

  double slope = hdr.get<float>(off::scl_slope);
  double inter = hdr.get<float>(off::scl_inter);
  const bool scale = std::isfinite(slope) && slope != 0.0 && !(slope == 1.0 && inter == 0.0);
  if (!std::isfinite(inter)) inter = 0.0;

  std::vector<float> data(static_cast<std::size_t>(voxels));
  const ByteReader payload(bytes.subspan(static_cast<std::size_t>(data_start)), swap);
  const std::size_t bpv = bytes_per_voxel(dt);
  for (std::size_t i = 0; i < data.size(); ++i) {
    double raw = 0.0;
    switch (dt) {
      case NiftiDatatype::UInt8: raw = payload.get<std::uint8_t>(i * bpv); break;
      case NiftiDatatype::Int16: raw = payload.get<std::int16_t>(i * bpv); break;
      case NiftiDatatype::Float32: {
        const float f = payload.get<float>(i * bpv);
        if (!scale) {
          data[i] = f;
          continue;
        }
        raw = f;
        break;
      }
      case NiftiDatatype::Float64: raw = payload.get<double>(i * bpv); break;
    }
    data[i] = static_cast<float>(scale ? raw * slope + inter : raw);
  }

  return Volume3D(dims, spacing, orientation, std::move(data));
}

std::vector<std::uint8_t> write_nifti(const Volume3D& v, bool compress) {
  return write_nifti(v, NiftiWriteOptions{compress, NiftiDatatype::Float32});
}

std::vector<std::uint8_t> write_nifti(const Volume3D& v, const NiftiWriteOptions& options) {
  if (options.datatype != NiftiDatatype::Float32 && options.datatype != NiftiDatatype::Int16)
    fail(ErrorCode::InvalidArgument, "writer supports float32 and int16 only");
  for (int i = 0; i < 3; ++i)
    if (v.dims()[i] > static_cast<std::size_t>(std::numeric_limits<std::int16_t>::max()))
      fail(ErrorCode::InvalidArgument, "dimension exceeds NIfTI-1 limit");

  const std::size_t bpv = bytes_per_voxel(options.datatype);
  std::vector<std::uint8_t> buf(kNiftiVoxOffset + v.size() * bpv, 0);

  put<std::int32_t>(buf, off::sizeof_hdr, 348);
  const std::array<std::int16_t, 8> dim{3,
                                        static_cast<std::int16_t>(v.dims()[0]),
                                        static_cast<std::int16_t>(v.dims()[1]),
                                        static_cast<std::int16_t>(v.dims()[2]),
                                        1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) put<std::int16_t>(buf, off::dim + 2 * i, dim[i]);
  put<std::int16_t>(buf, off::datatype, static_cast<std::int16_t>(options.datatype));
  put<std::int16_t>(buf, off::bitpix, static_cast<std::int16_t>(bpv * 8));
  put<float>(buf, off::pixdim, 1.0f);
  for (int i = 0; i < 3; ++i) put<float>(buf, off::pixdim + 4 * (i + 1), static_cast<float>(v.spacing()[i]));
  put<float>(buf, off::vox_offset, static_cast<float>(kNiftiVoxOffset));
  put<float>(buf, off::scl_slope, 0.0f);
  put<float>(buf, off::scl_inter, 0.0f);
  buf[off::xyzt_units] = 2 | 8;  // mm, s
  static constexpr char descrip[] = "wmhq";
  std::memcpy(buf.data() + off::descrip, descrip, sizeof(descrip) - 1);
  put<std::int16_t>(buf, off::qform_code, 0);
  put<std::int16_t>(buf, off::sform_code, 1);
  for (int j = 0; j < 3; ++j) {
    const AxisCode axis = v.orientation().axes[j];
    const int row = world_axis(axis);
    put<float>(buf, off::srow_x + 16 * row + 4 * j, static_cast<float>(axis_sign(axis) * v.spacing()[j]));
  }
  std::memcpy(buf.data() + off::magic, "n+1\0", 4);

  std::uint8_t* out = buf.data() + kNiftiVoxOffset;
  if (options.datatype == NiftiDatatype::Float32) {
    std::memcpy(out, v.data().data(), v.size() * sizeof(float));
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) {
      const float x = v[i];
      if (x != std::round(x) || x < std::numeric_limits<std::int16_t>::min() ||
          x > std::numeric_limits<std::int16_t>::max())
        fail(ErrorCode::InvalidArgument, "value not representable as int16");
      const auto s = static_cast<std::int16_t>(x);
      std::memcpy(out + 2 * i, &s, 2);
    }
  }

  return options.compress ? gzip_compress(buf) : buf;
}

Volume3D read_nifti_file(const std::filesystem::path& path) { return parse_nifti(read_file_bytes(path)); }

void write_nifti_file(const std::filesystem::path& path, const Volume3D& v, NiftiDatatype datatype) {
  const bool gz = path.extension() == ".gz";
  write_file_bytes(path, write_nifti(v, NiftiWriteOptions{gz, datatype}));
}

}  // namespace wmh

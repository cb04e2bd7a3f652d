#include "wmh/stackgen.hpp"

#include <algorithm>
#include <chrono>
#include <future>

#include "wmh/error.hpp"
#include "wmh/volume_io.hpp"

namespace wmh {
namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void check_role_net(const NetworkSpec& net, std::size_t in, const char* role) {
  check_network(net);
  if (net.input_channels != in || net.output_channels != 2)
    fail(ErrorCode::ShapeCheckFailed, std::string(role) + " network must map " + std::to_string(in) +
                                          " channel(s) to 2, declares " + std::to_string(net.input_channels) +
                                          " -> " + std::to_string(net.output_channels));
}

}  // namespace

void EnsembleSpec::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) fail(ErrorCode::InvalidArgument, "threshold must lie in (0, 1)");
  for (std::size_t t : tiling.tile) {
    if (t == 0) fail(ErrorCode::InvalidArgument, "tile extents must be >= 1");
    if (tiling.overlap >= t) fail(ErrorCode::InvalidArgument, "overlap must be smaller than every tile extent");
  }
  check_role_net(axial, 1, "axial");
  check_role_net(sagittal, 1, "sagittal");
  check_role_net(coronal, 1, "coronal");
  check_role_net(meta, 3, "meta");
}

const NetworkSpec& EnsembleSpec::plane_network(Plane p) const noexcept {
  switch (p) {
    case Plane::Axial: return axial;
    case Plane::Sagittal: return sagittal;
    case Plane::Coronal: return coronal;
  }
  return axial;
}

EnsembleSpec EnsembleSpec::from_networks(std::span<const NetworkSpec> nets) {
  EnsembleSpec spec;
  std::array<bool, 4> seen{};
  for (const NetworkSpec& n : nets) {
    int slot = -1;
    if (n.role == "axial") slot = 0;
    else if (n.role == "sagittal") slot = 1;
    else if (n.role == "coronal") slot = 2;
    else if (n.role == "meta") slot = 3;
    if (slot < 0) fail(ErrorCode::BadManifest, "network role '" + n.role + "' is not axial/sagittal/coronal/meta");
    if (seen[slot]) fail(ErrorCode::BadManifest, "duplicate network role '" + n.role + "'");
    seen[slot] = true;
    NetworkSpec& dst = slot == 0 ? spec.axial : slot == 1 ? spec.sagittal : slot == 2 ? spec.coronal : spec.meta;
    dst = n;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    fail(ErrorCode::BadManifest, "ensemble needs axial, sagittal, coronal and meta networks");
  return spec;
}

std::vector<NetworkSpec> EnsembleSpec::tagged_networks() const {
  std::vector<NetworkSpec> out{axial, sagittal, coronal, meta};
  out[0].role = "axial";
  out[1].role = "sagittal";
  out[2].role = "coronal";
  out[3].role = "meta";
  return out;
}

std::vector<std::size_t> tile_starts(std::size_t n, std::size_t tile, std::size_t overlap) {
  const std::size_t t = std::min(tile, n);
  const std::size_t step = tile > overlap ? tile - overlap : 1;
  std::vector<std::size_t> starts;
  for (std::size_t s = 0;; s += step) {
    const std::size_t origin = std::min(s, n - t);
    if (starts.empty() || starts.back() != origin) starts.push_back(origin);
    if (s + t >= n) break;
  }
  return starts;
}

Tensor4 tiled_forward(const NetworkSpec& net, const Tensor4& input, const TilingOptions& tiling) {
  const Shape4& is = input.shape();
  const Shape4 tile{is.c, std::min(tiling.tile[0], is.d), std::min(tiling.tile[1], is.h), std::min(tiling.tile[2], is.w)};
  const auto tile_out = try_infer_shape(net, tile);
  if (!tile_out)
    fail(ErrorCode::TileTooSmall, "tile " + tile.str() + " is not a viable input for the network");
  if (tile_out->d != tile.d || tile_out->h != tile.h || tile_out->w != tile.w)
    fail(ErrorCode::ShapeMismatch, "network changes spatial extent " + tile.str() + " -> " + tile_out->str());

  // Whole volume fits in one tile.
  if (tile.d == is.d && tile.h == is.h && tile.w == is.w) return forward(net, input);

  const std::size_t oc = tile_out->c;
  const std::size_t spatial = is.spatial();
  std::vector<double> sum(oc * spatial, 0.0);
  std::vector<std::uint32_t> hits(spatial, 0);

  const auto zs = tile_starts(is.d, tiling.tile[0], tiling.overlap);
  const auto ys = tile_starts(is.h, tiling.tile[1], tiling.overlap);
  const auto xs = tile_starts(is.w, tiling.tile[2], tiling.overlap);

  Tensor4 patch(tile);
  for (std::size_t z0 : zs)
    for (std::size_t y0 : ys)
      for (std::size_t x0 : xs) {
        for (std::size_t c = 0; c < is.c; ++c)
          for (std::size_t z = 0; z < tile.d; ++z)
            for (std::size_t y = 0; y < tile.h; ++y) {
              const float* src = &input.data()[input.index(c, z0 + z, y0 + y, x0)];
              std::copy(src, src + tile.w, &patch.data()[patch.index(c, z, y, 0)]);
            }
        const Tensor4 pred = forward(net, patch);
        for (std::size_t z = 0; z < tile.d; ++z)
          for (std::size_t y = 0; y < tile.h; ++y)
            for (std::size_t x = 0; x < tile.w; ++x) {
              const std::size_t g = ((z0 + z) * is.h + (y0 + y)) * is.w + (x0 + x);
              ++hits[g];
              for (std::size_t c = 0; c < oc; ++c) sum[c * spatial + g] += pred.at(c, z, y, x);
            }
      }

  Tensor4 out(Shape4{oc, is.d, is.h, is.w});
  for (std::size_t c = 0; c < oc; ++c)
    for (std::size_t g = 0; g < spatial; ++g)
      out.data()[c * spatial + g] = static_cast<float>(sum[c * spatial + g] / hits[g]);
  return out;
}

PosteriorMap tiled_forward(const NetworkSpec& net, const Volume3D& v, const TilingOptions& tiling) {
  const Tensor4 out = tiled_forward(net, tensor_from_volume(v), tiling);
  if (out.shape().c < 2) fail(ErrorCode::ShapeMismatch, "posterior network must emit at least 2 channels");
  PosteriorMap post = volume_from_channel(out, 1, v);
  check_posterior(post, "network output");
  return post;
}

void check_posterior(const Volume3D& v, std::string_view what) {
  for (float x : v.data())
    if (!(x >= -kPosteriorSlack && x <= 1.0 + kPosteriorSlack))
      fail(ErrorCode::NotAPosterior, std::string(what) + " has value " + std::to_string(x) + " outside [0, 1]");
}

EnsembleResult run_ensemble(const EnsembleSpec& spec, const Volume3D& flair, const Volume3D& mask) {
  spec.validate();
  if (flair.orientation() != mask.orientation())
    fail(ErrorCode::OrientationMismatch, "FLAIR is " + flair.orientation().str() + " but mask is " +
                                             mask.orientation().str());
  if (!flair.same_grid(mask)) fail(ErrorCode::ShapeMismatch, "FLAIR and mask grids differ");
  require_binary(mask, "brain mask");

  const Volume3D canon = to_canonical(flair);
  const Volume3D canon_mask = to_canonical(mask);

  // Planes are independent; each future only reads shared immutable inputs.
  std::array<std::future<PosteriorMap>, 3> jobs;
  for (std::size_t i = 0; i < 3; ++i) {
    const Plane p = kAllPlanes[i];
    jobs[i] = std::async(std::launch::async, [&spec, &canon, p] {
      const Volume3D reformatted = reformat_to(canon, p);
      const PosteriorMap post = tiled_forward(spec.plane_network(p), reformatted, spec.tiling);
      return reformat_from(post, p);
    });
  }
  EnsembleResult result;
  for (std::size_t i = 0; i < 3; ++i) result.planes[i] = jobs[i].get();

  const Tensor4 stacked = tensor_from_volumes(result.planes);
  const Tensor4 fused = tiled_forward(spec.meta, stacked, spec.tiling);
  if (fused.shape().c < 2) fail(ErrorCode::ShapeMismatch, "meta network must emit 2 channels");
  result.fused = volume_from_channel(fused, 1, canon);
  check_posterior(result.fused, "meta network output");
  for (std::size_t i = 0; i < result.fused.size(); ++i)
    if (canon_mask[i] == 0.0f) result.fused[i] = 0.0f;
  return result;
}

PosteriorMap predict_ensemble(const EnsembleSpec& spec, const Volume3D& flair, const Volume3D& mask) {
  return run_ensemble(spec, flair, mask).fused;
}

Volume3D binarize(const PosteriorMap& posterior, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) fail(ErrorCode::InvalidArgument, "threshold must lie in (0, 1)");
  Volume3D out = posterior.like(0.0f);
  for (std::size_t i = 0; i < posterior.size(); ++i) out[i] = posterior[i] > threshold ? 1.0f : 0.0f;
  return out;
}

double wmh_volume_ml(const Volume3D& mask) {
  require_binary(mask, "WMH mask");
  return static_cast<double>(count_foreground(mask)) * mask.voxel_volume() / 1000.0;
}

SegmentationResult segment_flair(const EnsembleSpec& spec, const Volume3D& flair, const Volume3D& brain_mask) {
  if (flair.orientation() != brain_mask.orientation())
    fail(ErrorCode::OrientationMismatch, "FLAIR is " + flair.orientation().str() + " but mask is " +
                                             brain_mask.orientation().str());
  SegmentationResult r;
  auto t0 = std::chrono::steady_clock::now();
  const Volume3D canon_mask = to_canonical(brain_mask);
  const Volume3D normalized = normalize_intensity(to_canonical(flair), canon_mask);
  r.normalize_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  r.posterior = predict_ensemble(spec, normalized, canon_mask);
  r.inference_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  r.mask = binarize(r.posterior, spec.threshold);
  r.wmh_ml = wmh_volume_ml(r.mask);
  r.threshold_ms = ms_since(t0);
  return r;
}

}  // namespace wmh

#include "wmh/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "wmh/error.hpp"
#include "wmh/volume_io.hpp"

namespace wmh {

namespace {

Conv3D pointwise(std::size_t cin, std::vector<float> weights, std::vector<float> bias) {
  Conv3D c;
  c.kernel_shape = {bias.size(), cin, 1, 1, 1};
  c.weights = std::move(weights);
  c.bias = std::move(bias);
  return c;
}

NetworkSpec two_class(std::size_t cin, Conv3D conv, bool softmax, std::string role) {
  NetworkSpec net;
  net.input_channels = cin;
  net.output_channels = 2;
  net.role = std::move(role);
  net.layers.push_back({"score", std::move(conv)});
  if (softmax) net.layers.push_back({"posterior", Softmax{}});
  return net;
}

// Portable draws: the standard distributions are implementation-defined, so map raw mt19937_64
// output ourselves.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    const double u1 = uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double clipped_normal(double limit) { return std::clamp(normal(), -limit, limit); }

  long jitter(long span) { return static_cast<long>(gen_() % static_cast<std::uint64_t>(2 * span + 1)) - span; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace

NetworkSpec threshold_detector(double t, double w, std::string role) {
  return two_class(1, pointwise(1, {0.0f, static_cast<float>(w)}, {0.0f, static_cast<float>(-w * t)}), true,
                   std::move(role));
}

NetworkSpec threshold_meta(double w) {
  const float wf = static_cast<float>(w);
  return two_class(3, pointwise(3, {0.0f, 0.0f, 0.0f, wf, wf, wf}, {0.0f, static_cast<float>(-1.5 * w)}), true,
                   "meta");
}

NetworkSpec averaging_meta() {
  const float third = 1.0f / 3.0f;
  return two_class(3, pointwise(3, {-third, -third, -third, third, third, third}, {1.0f, 0.0f}), false, "meta");
}

NetworkSpec zero_plane_network(std::string role) {
  return two_class(1, pointwise(1, {0.0f, 0.0f}, {0.0f, -1000.0f}), true, std::move(role));
}

Phantom make_phantom(std::uint64_t seed, Dims dims) {
  for (std::size_t d : dims)
    if (d < 24) fail(ErrorCode::InvalidArgument, "phantom dimensions must be at least 24");

  Rng rng(seed);
  const Spacing spacing{1.0, 1.0, 1.0};
  Volume3D flair(dims, spacing, Orientation::ras(), 0.0f);
  Volume3D brain = flair.like(0.0f);
  Volume3D lesion = flair.like(0.0f);

  std::array<double, 3> centre{}, radius{};
  for (int a = 0; a < 3; ++a) {
    centre[a] = (static_cast<double>(dims[a]) - 1.0) / 2.0;
    radius[a] = 0.42 * static_cast<double>(dims[a]);
  }
  auto rel = [&](int a, double f) { return static_cast<long>(std::lround(centre[a] + f * radius[a])); };

  for (std::size_t z = 0; z < dims[2]; ++z)
    for (std::size_t y = 0; y < dims[1]; ++y)
      for (std::size_t x = 0; x < dims[0]; ++x) {
        const double dx = (static_cast<double>(x) - centre[0]) / radius[0];
        const double dy = (static_cast<double>(y) - centre[1]) / radius[1];
        const double dz = (static_cast<double>(z) - centre[2]) / radius[2];
        if (dx * dx + dy * dy + dz * dz <= 1.0) brain.at(x, y, z) = 1.0f;
      }

  auto mark = [&](long x, long y, long z) {
    if (x < 0 || y < 0 || z < 0) return;
    const auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y), uz = static_cast<std::size_t>(z);
    if (ux >= dims[0] || uy >= dims[1] || uz >= dims[2] || brain.at(ux, uy, uz) == 0.0f) return;
    lesion.at(ux, uy, uz) = 1.0f;
  };

  // 5^3 cube left of centre.
  {
    const long x0 = rel(0, -0.45) + rng.jitter(1), y0 = rel(1, 0.0) + rng.jitter(1), z0 = rel(2, 0.0) + rng.jitter(1);
    for (long z = 0; z < 5; ++z)
      for (long y = 0; y < 5; ++y)
        for (long x = 0; x < 5; ++x) mark(x0 + x, y0 + y, z0 + z);
  }
  // Spheres of radius 3 and 2, and a two-voxel speck.
  auto sphere = [&](long cx, long cy, long cz, long r) {
    for (long z = -r; z <= r; ++z)
      for (long y = -r; y <= r; ++y)
        for (long x = -r; x <= r; ++x)
          if (x * x + y * y + z * z <= r * r) mark(cx + x, cy + y, cz + z);
  };
  sphere(rel(0, 0.35) + rng.jitter(1), rel(1, 0.25) + rng.jitter(1), rel(2, -0.2) + rng.jitter(1), 3);
  sphere(rel(0, 0.1) + rng.jitter(1), rel(1, -0.45) + rng.jitter(1), rel(2, 0.35) + rng.jitter(1), 2);
  {
    const long x = rel(0, -0.1), y = rel(1, 0.5), z = rel(2, -0.5);
    mark(x, y, z);
    mark(x + 1, y, z);
  }

  for (std::size_t i = 0; i < flair.size(); ++i) {
    double value;
    if (lesion[i] != 0.0f) value = 200.0 + 5.0 * rng.clipped_normal(3.0);
    else if (brain[i] != 0.0f) value = 100.0 + 10.0 * rng.clipped_normal(3.0);
    else value = 5.0 * rng.uniform();
    flair[i] = static_cast<float>(value);
  }

  // Place the threshold midway between the brightest tissue and the dimmest lesion voxel, in the
  // same standardized space the pipeline computes.
  const Volume3D standardized = normalize_intensity(flair, brain);
  double tissue_max = -std::numeric_limits<double>::infinity();
  double lesion_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < flair.size(); ++i) {
    if (brain[i] == 0.0f) continue;
    if (lesion[i] != 0.0f) lesion_min = std::min(lesion_min, static_cast<double>(standardized[i]));
    else tissue_max = std::max(tissue_max, static_cast<double>(standardized[i]));
  }

  Phantom p{std::move(flair), std::move(brain), std::move(lesion), 0.5 * (tissue_max + lesion_min), {}};
  p.ensemble.axial = threshold_detector(p.threshold, 50.0, "axial");
  p.ensemble.sagittal = threshold_detector(p.threshold, 50.0, "sagittal");
  p.ensemble.coronal = threshold_detector(p.threshold, 50.0, "coronal");
  p.ensemble.meta = threshold_meta();
  return p;
}

}  // namespace wmh

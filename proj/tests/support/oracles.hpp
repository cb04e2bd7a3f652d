#pragma once

// Reference implementations written independently of the library, used to derive expected
// values. Deliberately direct: nested loops, union-find, exhaustive enumeration, extended precision.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "wmh/network.hpp"
#include "wmh/reformat.hpp"
#include "wmh/volume.hpp"

namespace wmh::oracle {

// ---------------------------------------------------------------------------- convolution

struct ConvResult {
  std::array<std::size_t, 4> shape;  // (C, D, H, W)
  std::vector<double> values;
};

inline ConvResult naive_conv3d(const Tensor4& x, const Conv3D& p) {
  const auto& in = x.shape();
  const auto& k = p.kernel_shape;
  auto out_dim = [](std::size_t n, std::size_t kk, std::size_t s, std::size_t pad) {
    return (n + 2 * pad - kk) / s + 1;
  };
  const std::size_t od = out_dim(in.d, k[2], p.stride[0], p.padding[0]);
  const std::size_t oh = out_dim(in.h, k[3], p.stride[1], p.padding[1]);
  const std::size_t ow = out_dim(in.w, k[4], p.stride[2], p.padding[2]);
  ConvResult r{{k[0], od, oh, ow}, std::vector<double>(k[0] * od * oh * ow, 0.0)};
  for (std::size_t co = 0; co < k[0]; ++co)
    for (std::size_t z = 0; z < od; ++z)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t xx = 0; xx < ow; ++xx) {
          double acc = p.bias[co];
          for (std::size_t ci = 0; ci < k[1]; ++ci)
            for (std::size_t a = 0; a < k[2]; ++a)
              for (std::size_t b = 0; b < k[3]; ++b)
                for (std::size_t c = 0; c < k[4]; ++c) {
                  const long iz = static_cast<long>(z * p.stride[0] + a) - static_cast<long>(p.padding[0]);
                  const long iy = static_cast<long>(y * p.stride[1] + b) - static_cast<long>(p.padding[1]);
                  const long ix = static_cast<long>(xx * p.stride[2] + c) - static_cast<long>(p.padding[2]);
                  if (iz < 0 || iy < 0 || ix < 0 || iz >= static_cast<long>(in.d) ||
                      iy >= static_cast<long>(in.h) || ix >= static_cast<long>(in.w))
                    continue;
                  const double w = p.weights[(((co * k[1] + ci) * k[2] + a) * k[3] + b) * k[4] + c];
                  acc += w * x.at(ci, static_cast<std::size_t>(iz), static_cast<std::size_t>(iy),
                                  static_cast<std::size_t>(ix));
                }
          r.values[((co * od + z) * oh + y) * ow + xx] = acc;
        }
  return r;
}

// ------------------------------------------------------------------------------ reformat

/// Voxel-by-voxel relocation of `v` into RAS: index along each axis maps to the world axis it
/// names, reversed when the axis runs toward L, P or I.
inline Volume3D canonical_by_index(const Volume3D& v) {
  const auto& o = v.orientation().axes;
  Dims out_dims{};
  Spacing out_spacing{};
  for (int a = 0; a < 3; ++a) {
    out_dims[world_axis(o[a])] = v.dims()[a];
    out_spacing[world_axis(o[a])] = v.spacing()[a];
  }
  Volume3D out(out_dims, out_spacing, Orientation::ras(), 0.0f);
  for (std::size_t k = 0; k < v.dims()[2]; ++k)
    for (std::size_t j = 0; j < v.dims()[1]; ++j)
      for (std::size_t i = 0; i < v.dims()[0]; ++i) {
        const std::array<std::size_t, 3> idx{i, j, k};
        std::array<std::size_t, 3> w{};
        for (int a = 0; a < 3; ++a)
          w[world_axis(o[a])] = axis_sign(o[a]) > 0 ? idx[a] : v.dims()[a] - 1 - idx[a];
        out.at(w[0], w[1], w[2]) = v.at(i, j, k);
      }
  return out;
}

/// Output axis k of a plane layout takes RAS axis table[k]: Axial (x,y,z), Coronal (x,z,y),
/// Sagittal (y,z,x).
inline std::array<int, 3> plane_table(Plane p) {
  switch (p) {
    case Plane::Axial: return {0, 1, 2};
    case Plane::Coronal: return {0, 2, 1};
    case Plane::Sagittal: return {1, 2, 0};
  }
  return {0, 1, 2};
}

inline Volume3D plane_by_index(const Volume3D& ras, Plane p) {
  const auto t = plane_table(p);
  const Dims d{ras.dims()[t[0]], ras.dims()[t[1]], ras.dims()[t[2]]};
  const Spacing s{ras.spacing()[t[0]], ras.spacing()[t[1]], ras.spacing()[t[2]]};
  Orientation o;
  for (int k = 0; k < 3; ++k) o.axes[k] = make_axis(t[k], 1);
  Volume3D out(d, s, o, 0.0f);
  for (std::size_t k = 0; k < d[2]; ++k)
    for (std::size_t j = 0; j < d[1]; ++j)
      for (std::size_t i = 0; i < d[0]; ++i) {
        const std::array<std::size_t, 3> oi{i, j, k};
        std::array<std::size_t, 3> r{};
        for (int a = 0; a < 3; ++a) r[t[a]] = oi[a];
        out.at(i, j, k) = ras.at(r[0], r[1], r[2]);
      }
  return out;
}

/// Inverse of plane_by_index for a volume laid out in plane `p`.
inline Volume3D unplane_by_index(const Volume3D& v, Plane p) {
  const auto t = plane_table(p);
  Dims d{};
  Spacing s{};
  for (int a = 0; a < 3; ++a) {
    d[t[a]] = v.dims()[a];
    s[t[a]] = v.spacing()[a];
  }
  Volume3D out(d, s, Orientation::ras(), 0.0f);
  for (std::size_t k = 0; k < v.dims()[2]; ++k)
    for (std::size_t j = 0; j < v.dims()[1]; ++j)
      for (std::size_t i = 0; i < v.dims()[0]; ++i) {
        const std::array<std::size_t, 3> vi{i, j, k};
        std::array<std::size_t, 3> r{};
        for (int a = 0; a < 3; ++a) r[t[a]] = vi[a];
        out.at(r[0], r[1], r[2]) = v.at(i, j, k);
      }
  return out;
}

inline bool bit_equal(const Volume3D& a, const Volume3D& b) {
  if (a.dims() != b.dims() || a.orientation() != b.orientation() || a.spacing() != b.spacing()) return false;
  return std::equal(a.data().begin(), a.data().end(), b.data().begin(), b.data().end(),
                    [](float x, float y) { return std::memcmp(&x, &y, sizeof(float)) == 0; });
}

// ------------------------------------------------------------------------------- lesions

/// Union-find connected components; labels 1..K in order of first raster occurrence.
inline std::vector<int> union_find_labels(const Volume3D& mask, int connectivity) {
  const auto& d = mask.dims();
  const std::size_t n = mask.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  auto unite = [&](std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  for (long z = 0; z < static_cast<long>(d[2]); ++z)
    for (long y = 0; y < static_cast<long>(d[1]); ++y)
      for (long x = 0; x < static_cast<long>(d[0]); ++x) {
        const std::size_t i = mask.index(x, y, z);
        if (mask[i] == 0.0f) continue;
        for (long dz = -1; dz <= 1; ++dz)
          for (long dy = -1; dy <= 1; ++dy)
            for (long dx = -1; dx <= 1; ++dx) {
              const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
              if (manhattan == 0) continue;
              if (connectivity == 6 && manhattan > 1) continue;
              if (connectivity == 18 && manhattan > 2) continue;
              const long nx = x + dx, ny = y + dy, nz = z + dz;
              if (nx < 0 || ny < 0 || nz < 0 || nx >= static_cast<long>(d[0]) || ny >= static_cast<long>(d[1]) ||
                  nz >= static_cast<long>(d[2]))
                continue;
              const std::size_t j = mask.index(nx, ny, nz);
              if (mask[j] != 0.0f) unite(i, j);
            }
      }
  std::vector<int> labels(n, 0);
  std::map<std::size_t, int> ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i] == 0.0f) continue;
    const std::size_t root = find(i);
    auto [it, inserted] = ids.emplace(root, static_cast<int>(ids.size()) + 1);
    labels[i] = it->second;
  }
  return labels;
}

/// True when the two labelings induce the same partition of the foreground.
inline bool same_partition(const std::vector<int>& a, const Volume3D& b) {
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int la = a[i], lb = static_cast<int>(b[i]);
    if ((la == 0) != (lb == 0)) return false;
    if (la == 0) continue;
    if (auto [it, ok] = ab.emplace(la, lb); !ok && it->second != lb) return false;
    if (auto [it, ok] = ba.emplace(lb, la); !ok && it->second != la) return false;
  }
  return true;
}

struct LesionCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

/// Detection counting: a gt component is a TP if any predicted voxel lies in it, else FN; a
/// predicted component with no gt voxel is FP.
inline LesionCounts lesion_counts(const Volume3D& pred, const Volume3D& gt, int connectivity) {
  const auto lp = union_find_labels(pred, connectivity);
  const auto lg = union_find_labels(gt, connectivity);
  std::set<int> gt_all, gt_hit, pred_all, pred_hit;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (lg[i]) gt_all.insert(lg[i]);
    if (lp[i]) pred_all.insert(lp[i]);
    if (lg[i] && pred[i] != 0.0f) gt_hit.insert(lg[i]);
    if (lp[i] && gt[i] != 0.0f) pred_hit.insert(lp[i]);
  }
  return {gt_hit.size(), pred_all.size() - pred_hit.size(), gt_all.size() - gt_hit.size()};
}

// ------------------------------------------------------------------------------- metrics

inline double dice_by_count(const Volume3D& a, const Volume3D& b) {
  double inter = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i];
    nb += b[i];
    inter += a[i] * b[i];
  }
  return na + nb == 0 ? 1.0 : 2.0 * inter / (na + nb);
}

struct PrOracle {
  std::vector<std::array<double, 3>> points;  // threshold, precision, recall
  double auc = 0.0;
};

/// For every distinct in-mask value v (descending), counts voxels with value >= v by a full scan.
inline PrOracle pr_by_enumeration(const std::vector<double>& post, const std::vector<int>& gt) {
  std::set<double, std::greater<>> values(post.begin(), post.end());
  double positives = 0;
  for (int g : gt) positives += g;
  PrOracle r;
  for (double v : values) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < post.size(); ++i)
      if (post[i] >= v) (gt[i] ? tp : fp) += 1;
    r.points.push_back({v, tp / (tp + fp), tp / positives});
  }
  double prev_r = 0.0, prev_p = r.points.front()[1];
  for (const auto& p : r.points) {
    r.auc += (p[2] - prev_r) * (p[1] + prev_p) / 2.0;
    prev_r = p[2];
    prev_p = p[1];
  }
  return r;
}

// --------------------------------------------------------------------------------- stats

using Big = boost::multiprecision::cpp_bin_float_50;

/// Two-sided tail probability of Student's t with integer df, by the classical finite series
/// in theta = atan(t / sqrt(df)), evaluated at 50 significant digits.
inline double t_two_sided_series(double t_in, int df) {
  using boost::multiprecision::atan;
  using boost::multiprecision::cos;
  using boost::multiprecision::sin;
  using boost::multiprecision::sqrt;
  const Big pi = boost::math::constants::pi<Big>();
  const Big t = Big(std::fabs(t_in));
  const Big theta = atan(t / sqrt(Big(df)));
  const Big c2 = cos(theta) * cos(theta);
  Big inside;  // P(|T| < t)
  if (df % 2 == 1) {
    Big sum = 0, term = 1;
    if (df > 1) {
      sum = 1;
      for (int k = 1; 2 * k + 1 <= df - 2; ++k) {
        term *= Big(2 * k) / Big(2 * k + 1) * c2;
        sum += term;
      }
    }
    inside = 2 / pi * (theta + (df > 1 ? sin(theta) * cos(theta) * sum : Big(0)));
  } else {
    Big sum = 1, term = 1;
    for (int k = 1; 2 * k <= df - 2; ++k) {
      term *= Big(2 * k - 1) / Big(2 * k) * c2;
      sum += term;
    }
    inside = sin(theta) * sum;
  }
  return static_cast<double>(Big(1) - inside);
}

/// Monte Carlo P(T <= t) from `samples` draws of Z / sqrt(chi2_df / df).
inline double t_cdf_monte_carlo(double t, double df, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::gamma_distribution<double> half_chi2(df / 2.0, 2.0);
  std::size_t below = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double draw = z(rng) / std::sqrt(half_chi2(rng) / df);
    below += draw <= t;
  }
  return static_cast<double>(below) / static_cast<double>(samples);
}

struct OlsOracle {
  std::vector<double> beta, se, t, p;
  double rss = 0.0, r_squared = 0.0;
};

/// Normal equations X'X b = X'y solved by Gauss-Jordan elimination at 50 digits.
inline OlsOracle ols_normal_equations(const std::vector<double>& x, std::size_t cols, const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<std::vector<Big>> a(cols, std::vector<Big>(2 * cols + 1, Big(0)));
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      Big s = 0;
      for (std::size_t r = 0; r < n; ++r) s += Big(x[r * cols + i]) * Big(x[r * cols + j]);
      a[i][j] = s;
    }
    a[i][cols + i] = 1;
    Big s = 0;
    for (std::size_t r = 0; r < n; ++r) s += Big(x[r * cols + i]) * Big(y[r]);
    a[i][2 * cols] = s;
  }
  for (std::size_t c = 0; c < cols; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < cols; ++r)
      if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    const Big d = a[c][c];
    for (auto& v : a[c]) v /= d;
    for (std::size_t r = 0; r < cols; ++r) {
      if (r == c) continue;
      const Big f = a[r][c];
      if (f == 0) continue;
      for (std::size_t k = 0; k < a[r].size(); ++k) a[r][k] -= f * a[c][k];
    }
  }
  OlsOracle o;
  std::vector<Big> beta(cols);
  for (std::size_t i = 0; i < cols; ++i) beta[i] = a[i][2 * cols];
  Big rss = 0, mean = 0, tss = 0;
  for (std::size_t r = 0; r < n; ++r) mean += Big(y[r]);
  mean /= n;
  for (std::size_t r = 0; r < n; ++r) {
    Big fit = 0;
    for (std::size_t i = 0; i < cols; ++i) fit += Big(x[r * cols + i]) * beta[i];
    const Big e = Big(y[r]) - fit;
    rss += e * e;
    tss += (Big(y[r]) - mean) * (Big(y[r]) - mean);
  }
  const int df = static_cast<int>(n - cols);
  const Big s2 = rss / df;
  for (std::size_t i = 0; i < cols; ++i) {
    const Big se = boost::multiprecision::sqrt(s2 * a[i][cols + i]);
    o.beta.push_back(static_cast<double>(beta[i]));
    o.se.push_back(static_cast<double>(se));
    const double t = static_cast<double>(beta[i] / se);
    o.t.push_back(t);
    o.p.push_back(t_two_sided_series(t, df));
  }
  o.rss = static_cast<double>(rss);
  o.r_squared = static_cast<double>(1 - rss / tss);
  return o;
}

struct AgreementOracle {
  double bias, sd, loa_low, loa_high, grand_mean, cv, rpc, r2;
  double t, p;  // paired t-test of a - b
};

inline AgreementOracle agreement(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  Big sd_sum = 0, mean_sum = 0, sa = 0, sb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sd_sum += Big(b[i]) - Big(a[i]);
    mean_sum += (Big(a[i]) + Big(b[i])) / 2;
    sa += Big(a[i]);
    sb += Big(b[i]);
  }
  const Big bias = sd_sum / n, gm = mean_sum / n, ma = sa / n, mb = sb / n;
  Big ss = 0, saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Big d = Big(b[i]) - Big(a[i]) - bias;
    ss += d * d;
    saa += (Big(a[i]) - ma) * (Big(a[i]) - ma);
    sbb += (Big(b[i]) - mb) * (Big(b[i]) - mb);
    sab += (Big(a[i]) - ma) * (Big(b[i]) - mb);
  }
  const Big sd = boost::multiprecision::sqrt(ss / (n - 1));
  AgreementOracle o{};
  o.bias = static_cast<double>(bias);
  o.sd = static_cast<double>(sd);
  o.loa_low = static_cast<double>(bias - Big("1.96") * sd);
  o.loa_high = static_cast<double>(bias + Big("1.96") * sd);
  o.grand_mean = static_cast<double>(gm);
  o.cv = static_cast<double>(100 * sd / gm);
  o.rpc = static_cast<double>(Big("1.96") * 100 * sd / gm);
  o.r2 = static_cast<double>(sab * sab / (saa * sbb));
  const Big t = -bias / (sd / boost::multiprecision::sqrt(Big(n)));
  o.t = static_cast<double>(t);
  o.p = t_two_sided_series(o.t, static_cast<int>(n - 1));
  return o;
}

/// One-sample Kolmogorov-Smirnov test against U(0,1): returns the asymptotic p-value with
/// Stephens' small-sample correction.
inline double ks_uniform_p(std::vector<double> p) {
  std::sort(p.begin(), p.end());
  const double n = static_cast<double>(p.size());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max(d, static_cast<double>(i + 1) / n - p[i]);
    d = std::max(d, p[i] - static_cast<double>(i) / n);
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) sum += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace wmh::oracle

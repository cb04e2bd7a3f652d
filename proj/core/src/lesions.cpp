#include "wmh/lesions.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <sstream>

#include "wmh/error.hpp"

namespace wmh {
namespace {

std::vector<std::array<int, 3>> neighbour_offsets(int connectivity) {
  std::vector<std::array<int, 3>> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (manhattan == 0) continue;
        if (connectivity == 6 && manhattan > 1) continue;
        if (connectivity == 18 && manhattan > 2) continue;
        out.push_back({dx, dy, dz});
      }
  return out;
}

}  // namespace

LesionSet label_components(const Volume3D& mask, int connectivity) {
  if (connectivity != 6 && connectivity != 18 && connectivity != 26)
    fail(ErrorCode::InvalidArgument, "connectivity must be 6, 18 or 26");
  require_binary(mask, "lesion mask");

  const Dims& d = mask.dims();
  const auto offsets = neighbour_offsets(connectivity);
  std::vector<std::int32_t> comp(mask.size(), 0);
  std::vector<Lesion> found;
  std::vector<std::size_t> stack;

  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (mask[start] == 0.0f || comp[start] != 0) continue;
    const auto cid = static_cast<std::int32_t>(found.size() + 1);
    Lesion lesion;
    lesion.first_index = start;
    lesion.bbox.lo = {d[0], d[1], d[2]};
    comp[start] = cid;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const std::size_t x = i % d[0], y = (i / d[0]) % d[1], z = i / (d[0] * d[1]);
      ++lesion.voxel_count;
      const std::array<std::size_t, 3> p{x, y, z};
      for (int a = 0; a < 3; ++a) {
        lesion.bbox.lo[a] = std::min(lesion.bbox.lo[a], p[a]);
        lesion.bbox.hi[a] = std::max(lesion.bbox.hi[a], p[a]);
      }
      for (const auto& o : offsets) {
        const auto nx = static_cast<std::int64_t>(x) + o[0];
        const auto ny = static_cast<std::int64_t>(y) + o[1];
        const auto nz = static_cast<std::int64_t>(z) + o[2];
        if (nx < 0 || ny < 0 || nz < 0 || nx >= static_cast<std::int64_t>(d[0]) ||
            ny >= static_cast<std::int64_t>(d[1]) || nz >= static_cast<std::int64_t>(d[2]))
          continue;
        const std::size_t j = mask.index(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny),
                                         static_cast<std::size_t>(nz));
        if (mask[j] != 0.0f && comp[j] == 0) {
          comp[j] = cid;
          stack.push_back(j);
        }
      }
    }
    found.push_back(lesion);
  }

  // Discovery order is raster order of first voxels; reorder by size.
  std::vector<std::size_t> order(found.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return found[a].voxel_count > found[b].voxel_count; });
  std::vector<int> relabel(found.size() + 1, 0);
  LesionSet set;
  set.connectivity = connectivity;
  const double voxel_ml = mask.voxel_volume() / 1000.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    Lesion l = found[order[rank]];
    l.id = static_cast<int>(rank + 1);
    l.volume_ml = static_cast<double>(l.voxel_count) * voxel_ml;
    relabel[order[rank] + 1] = l.id;
    set.lesions.push_back(l);
  }
  set.labels = mask.like(0.0f);
  for (std::size_t i = 0; i < comp.size(); ++i)
    if (comp[i] != 0) set.labels[i] = static_cast<float>(relabel[static_cast<std::size_t>(comp[i])]);
  return set;
}

LesionMatching match_lesions(const LesionSet& pred, const LesionSet& gt) {
  if (pred.labels.dims() != gt.labels.dims()) fail(ErrorCode::ShapeMismatch, "lesion label grids differ");

  std::map<std::pair<int, int>, std::size_t> overlap;  // (pred, gt) -> voxels
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const int p = static_cast<int>(pred.labels[i]);
    const int g = static_cast<int>(gt.labels[i]);
    if (p > 0 && g > 0) ++overlap[{p, g}];
  }

  struct Candidate {
    int pred, gt;
    std::size_t voxels;
  };
  std::vector<Candidate> candidates;
  std::vector<bool> pred_hits(pred.size() + 1, false), gt_hits(gt.size() + 1, false);
  for (const auto& [key, n] : overlap) {
    candidates.push_back({key.first, key.second, n});
    pred_hits[static_cast<std::size_t>(key.first)] = true;
    gt_hits[static_cast<std::size_t>(key.second)] = true;
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.voxels != b.voxels) return a.voxels > b.voxels;
    if (a.gt != b.gt) return a.gt < b.gt;
    return a.pred < b.pred;
  });

  LesionMatching m;
  std::vector<bool> pred_used(pred.size() + 1, false), gt_used(gt.size() + 1, false);
  for (const Candidate& c : candidates) {
    if (pred_used[static_cast<std::size_t>(c.pred)] || gt_used[static_cast<std::size_t>(c.gt)]) continue;
    pred_used[static_cast<std::size_t>(c.pred)] = gt_used[static_cast<std::size_t>(c.gt)] = true;
    m.pairs.emplace_back(c.pred, c.gt);
  }
  for (int id = 1; id <= static_cast<int>(pred.size()); ++id) {
    if (!pred_hits[static_cast<std::size_t>(id)]) m.unmatched_pred.push_back(id);
    else if (!pred_used[static_cast<std::size_t>(id)]) m.collapsed_pred.push_back(id);
  }
  for (int id = 1; id <= static_cast<int>(gt.size()); ++id) {
    if (!gt_hits[static_cast<std::size_t>(id)]) m.unmatched_gt.push_back(id);
    else if (!gt_used[static_cast<std::size_t>(id)]) m.collapsed_gt.push_back(id);
  }
  return m;
}

std::string lesion_table_csv(const LesionSet& set) {
  std::ostringstream os;
  os.precision(10);
  os << "id,voxels,ml,x0,y0,z0,x1,y1,z1\n";
  for (const Lesion& l : set.lesions) {
    os << l.id << ',' << l.voxel_count << ',' << l.volume_ml;
    for (auto v : l.bbox.lo) os << ',' << v;
    for (auto v : l.bbox.hi) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

}  // namespace wmh

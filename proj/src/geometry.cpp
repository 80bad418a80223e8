#include "hps/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "hps/chebyshev.hpp"

namespace hps {

const char* to_string(Side s) noexcept {
  switch (s) {
    case Side::south: return "south";
    case Side::east: return "east";
    case Side::north: return "north";
    case Side::west: return "west";
  }
  return "?";
}

std::array<double, 2> outward_normal(Side s) noexcept {
  switch (s) {
    case Side::south: return {0.0, -1.0};
    case Side::east: return {1.0, 0.0};
    case Side::north: return {0.0, 1.0};
    case Side::west: return {-1.0, 0.0};
  }
  return {0.0, 0.0};
}

LeafIndexSets leaf_index_sets(int n_c) {
  if (n_c < 4) throw std::invalid_argument("leaf_index_sets: n_c must be >= 4");
  LeafIndexSets s;
  s.n_c = n_c;
  const Index n = n_c;
  auto g = [n](Index ix, Index iy) { return ix + n * iy; };
  for (Index k = 1; k < n - 1; ++k) {
    s.south.push_back(g(k, 0));
    s.east.push_back(g(n - 1, k));
    s.north.push_back(g(k, n - 1));
    s.west.push_back(g(0, k));
  }
  for (const auto* side : {&s.south, &s.east, &s.north, &s.west})
    s.boundary.insert(s.boundary.end(), side->begin(), side->end());
  for (Index iy = 1; iy < n - 1; ++iy)
    for (Index ix = 1; ix < n - 1; ++ix) s.interior.push_back(g(ix, iy));
  s.all = s.boundary;
  s.all.insert(s.all.end(), s.interior.begin(), s.interior.end());
  return s;
}

std::vector<BoundaryPoint> leaf_boundary_points(const Rect& rect, int n_c) {
  const ChebGrid1D xs = cheb_nodes(n_c, rect.xmin, rect.xmax);
  const ChebGrid1D ys = cheb_nodes(n_c, rect.ymin, rect.ymax);
  std::vector<BoundaryPoint> pts;
  pts.reserve(static_cast<std::size_t>(4 * n_c - 8));
  for (int k = 1; k < n_c - 1; ++k) pts.push_back({Side::south, xs.nodes[k], rect.ymin});
  for (int k = 1; k < n_c - 1; ++k) pts.push_back({Side::east, rect.xmax, ys.nodes[k]});
  for (int k = 1; k < n_c - 1; ++k) pts.push_back({Side::north, xs.nodes[k], rect.ymax});
  for (int k = 1; k < n_c - 1; ++k) pts.push_back({Side::west, rect.xmin, ys.nodes[k]});
  return pts;
}

std::vector<std::array<double, 2>> leaf_points(const Rect& rect, int n_c) {
  const ChebGrid1D xs = cheb_nodes(n_c, rect.xmin, rect.xmax);
  const ChebGrid1D ys = cheb_nodes(n_c, rect.ymin, rect.ymax);
  const LeafIndexSets sets = leaf_index_sets(n_c);
  std::vector<std::array<double, 2>> pts;
  pts.reserve(sets.all.size());
  for (Index g : sets.all) pts.push_back({xs.nodes[g % n_c], ys.nodes[g / n_c]});
  return pts;
}

SiblingIndexSets sibling_interface_sets(const BoxNode& alpha, std::span<const BoundaryPoint> alpha_boundary,
                                        const BoxNode& beta, std::span<const BoundaryPoint> beta_boundary) {
  const Rect& a = alpha.rect;
  const Rect& b = beta.rect;
  Side side_a, side_b;
  bool along_y;
  if (a.xmax == b.xmin && a.ymin == b.ymin && a.ymax == b.ymax) {
    side_a = Side::east;
    side_b = Side::west;
    along_y = true;
  } else if (a.ymax == b.ymin && a.xmin == b.xmin && a.xmax == b.xmax) {
    side_a = Side::north;
    side_b = Side::south;
    along_y = false;
  } else {
    throw InterfaceMismatchError("sibling_interface_sets: boxes " + std::to_string(alpha.id) + " and " +
                                 std::to_string(beta.id) + " do not share a full edge");
  }

  SiblingIndexSets s;
  auto split = [](std::span<const BoundaryPoint> pts, Side shared, std::vector<Index>& ext, std::vector<Index>& itf) {
    for (Index k = 0; k < static_cast<Index>(pts.size()); ++k) (pts[k].side == shared ? itf : ext).push_back(k);
  };
  split(alpha_boundary, side_a, s.exterior_alpha, s.interface_alpha);
  split(beta_boundary, side_b, s.exterior_beta, s.interface_beta);

  auto coord = [along_y](const BoundaryPoint& p) { return along_y ? p.y : p.x; };
  auto by_coord = [&](std::span<const BoundaryPoint> pts) {
    return [pts, &coord](Index l, Index r) { return coord(pts[l]) < coord(pts[r]); };
  };
  std::stable_sort(s.interface_alpha.begin(), s.interface_alpha.end(), by_coord(alpha_boundary));
  std::stable_sort(s.interface_beta.begin(), s.interface_beta.end(), by_coord(beta_boundary));

  if (s.interface_alpha.size() != s.interface_beta.size() || s.interface_alpha.empty())
    throw InterfaceMismatchError("sibling_interface_sets: interface point counts differ (" +
                                 std::to_string(s.interface_alpha.size()) + " vs " +
                                 std::to_string(s.interface_beta.size()) + ")");
  for (std::size_t k = 0; k < s.interface_alpha.size(); ++k) {
    const BoundaryPoint& pa = alpha_boundary[s.interface_alpha[k]];
    const BoundaryPoint& pb = beta_boundary[s.interface_beta[k]];
    if (pa.x != pb.x || pa.y != pb.y)
      throw InterfaceMismatchError("sibling_interface_sets: interface points do not coincide");
  }
  return s;
}

BoxTree BoxTree::build_uniform(const Rect& domain, int levels, int n_c) {
  if (levels < 1) throw std::invalid_argument("build_uniform: need at least one level");
  if (levels > 24) throw std::invalid_argument("build_uniform: too many levels");
  if (n_c < 4) throw std::invalid_argument("build_uniform: n_c must be >= 4");
  if (!domain.valid()) throw std::invalid_argument("build_uniform: degenerate domain");

  BoxTree t;
  t.levels_ = levels;
  t.n_c_ = n_c;
  const int n_boxes = (1 << levels) - 1;
  t.nodes_.resize(static_cast<std::size_t>(n_boxes));
  t.nodes_[0] = BoxNode{1, 0, 0, domain, std::nullopt, SplitAxis::vertical};
  // Heap numbering: children of box i are 2i and 2i+1, so every level is a
  // contiguous id range and parents precede children.
  for (int id = 1; id <= n_boxes; ++id) {
    BoxNode& nd = t.nodes_[id - 1];
    if (nd.level == levels - 1) continue;
    nd.split_axis = (nd.level % 2 == 0) ? SplitAxis::vertical : SplitAxis::horizontal;
    const int a = 2 * id, b = 2 * id + 1;
    nd.children = std::array<int, 2>{a, b};
    Rect ra = nd.rect, rb = nd.rect;
    if (nd.split_axis == SplitAxis::vertical) {
      const double mid = 0.5 * (nd.rect.xmin + nd.rect.xmax);
      ra.xmax = mid;
      rb.xmin = mid;
    } else {
      const double mid = 0.5 * (nd.rect.ymin + nd.rect.ymax);
      ra.ymax = mid;
      rb.ymin = mid;
    }
    t.nodes_[a - 1] = BoxNode{a, nd.level + 1, id, ra, std::nullopt, SplitAxis::vertical};
    t.nodes_[b - 1] = BoxNode{b, nd.level + 1, id, rb, std::nullopt, SplitAxis::vertical};
  }

  t.leaf_sets_ = leaf_index_sets(n_c);
  t.boundaries_.resize(static_cast<std::size_t>(n_boxes));
  t.sibling_sets_.resize(static_cast<std::size_t>(n_boxes));
  for (int id = n_boxes; id >= 1; --id) {
    const BoxNode& nd = t.nodes_[id - 1];
    auto& bnd = t.boundaries_[id - 1];
    if (nd.is_leaf()) {
      bnd = leaf_boundary_points(nd.rect, n_c);
      continue;
    }
    const auto [a, b] = *nd.children;
    const auto& ba = t.boundaries_[a - 1];
    const auto& bb = t.boundaries_[b - 1];
    SiblingIndexSets s = sibling_interface_sets(t.nodes_[a - 1], ba, t.nodes_[b - 1], bb);
    bnd.reserve(s.exterior_alpha.size() + s.exterior_beta.size());
    for (Index k : s.exterior_alpha) bnd.push_back(ba[k]);
    for (Index k : s.exterior_beta) bnd.push_back(bb[k]);
    t.sibling_sets_[id - 1] = std::move(s);
  }
  // Children boundaries of merged boxes are no longer needed except for
  // leaves (global numbering) and for diagnostics; keep all, they are small.

  // Global numbering: leaves in id order, each contributing its points in
  // [boundary, interior] order; a point already numbered by a lower id keeps
  // that index.
  std::map<std::pair<double, double>, Index> seen;
  t.leaf_global_.resize(static_cast<std::size_t>(n_boxes));
  t.leaf_owned_.resize(static_cast<std::size_t>(n_boxes));
  for (int id = 1; id <= n_boxes; ++id) {
    const BoxNode& nd = t.nodes_[id - 1];
    if (!nd.is_leaf()) continue;
    const auto pts = leaf_points(nd.rect, n_c);
    auto& glob = t.leaf_global_[id - 1];
    auto& own = t.leaf_owned_[id - 1];
    glob.resize(pts.size());
    own.resize(pts.size());
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const auto key = std::make_pair(pts[q][0], pts[q][1]);
      auto [it, inserted] = seen.emplace(key, static_cast<Index>(t.points_.size()));
      if (inserted) t.points_.push_back(pts[q]);
      glob[q] = it->second;
      own[q] = inserted ? 1 : 0;
    }
  }
  return t;
}

const SiblingIndexSets& BoxTree::sibling_sets(int parent_id) const {
  const BoxNode& nd = node(parent_id);
  if (nd.is_leaf()) throw std::invalid_argument("sibling_sets: box " + std::to_string(parent_id) + " is a leaf");
  return sibling_sets_[static_cast<std::size_t>(parent_id - 1)];
}

std::span<const Index> BoxTree::leaf_global_indices(int leaf_id) const {
  if (!node(leaf_id).is_leaf()) throw std::invalid_argument("leaf_global_indices: not a leaf");
  return leaf_global_[static_cast<std::size_t>(leaf_id - 1)];
}

std::span<const std::uint8_t> BoxTree::leaf_ownership(int leaf_id) const {
  if (!node(leaf_id).is_leaf()) throw std::invalid_argument("leaf_ownership: not a leaf");
  return leaf_owned_[static_cast<std::size_t>(leaf_id - 1)];
}

std::string BoxTree::describe() const {
  std::ostringstream os;
  char buf[256];
  for (const BoxNode& nd : nodes_) {
    std::snprintf(buf, sizeof buf, "%d %d %d %.17g %.17g %.17g %.17g", nd.id, nd.level, nd.is_leaf() ? 1 : 0,
                  nd.rect.xmin, nd.rect.xmax, nd.rect.ymin, nd.rect.ymax);
    os << buf;
    if (nd.children)
      os << ' ' << (*nd.children)[0] << ' ' << (*nd.children)[1] << '\n';
    else
      os << " - -\n";
  }
  return os.str();
}

}  // namespace hps

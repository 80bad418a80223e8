#pragma once

// Uniform binary box tree over a rectangle, plus all index bookkeeping:
// leaf index sets, sibling interface sets, per-box boundary point lists and
// the global numbering of discretization points.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hps/cmatrix.hpp"

namespace hps {

struct Rect {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;

  double width() const noexcept { return xmax - xmin; }
  double height() const noexcept { return ymax - ymin; }
  bool valid() const noexcept { return xmax > xmin && ymax > ymin; }
};

/// vertical: the box is cut by a vertical line; alpha is the left child.
/// horizontal: cut by a horizontal line; alpha is the bottom child.
enum class SplitAxis : std::uint8_t { vertical, horizontal };

enum class Side : std::uint8_t { south, east, north, west };

const char* to_string(Side s) noexcept;
/// Outward unit normal of a side.
std::array<double, 2> outward_normal(Side s) noexcept;

struct BoundaryPoint {
  Side side;
  double x;
  double y;
};

struct BoxNode {
  int id = 0;      // 1-based; parent id < child id
  int level = 0;   // root is level 0
  int parent = 0;  // 0 for the root
  Rect rect;
  std::optional<std::array<int, 2>> children;  // (alpha, beta)
  SplitAxis split_axis = SplitAxis::vertical;  // meaningful for non-leaves only

  bool is_leaf() const noexcept { return !children.has_value(); }
};

/// Index sets of one leaf in terms of the full n_c x n_c tensor grid, whose
/// point (ix, iy) has index ix + n_c * iy. Corners are excluded.
struct LeafIndexSets {
  int n_c = 0;
  std::vector<Index> south, east, north, west;  // each ordered by increasing coordinate
  std::vector<Index> boundary;                  // [south, east, north, west]
  std::vector<Index> interior;                  // x fastest
  std::vector<Index> all;                       // [boundary, interior]

  Index n_boundary() const noexcept { return static_cast<Index>(boundary.size()); }
  Index n_interior() const noexcept { return static_cast<Index>(interior.size()); }
  Index n_total() const noexcept { return static_cast<Index>(all.size()); }
};

LeafIndexSets leaf_index_sets(int n_c);

/// Partition of two siblings' boundary points. Entries are positions in the
/// respective child's boundary ordering. interface_alpha[k] and
/// interface_beta[k] are the same geometric point.
struct SiblingIndexSets {
  std::vector<Index> exterior_alpha;   // I_1
  std::vector<Index> exterior_beta;    // I_2
  std::vector<Index> interface_alpha;  // I_3 seen from alpha
  std::vector<Index> interface_beta;   // I_3 seen from beta

  Index n1() const noexcept { return static_cast<Index>(exterior_alpha.size()); }
  Index n2() const noexcept { return static_cast<Index>(exterior_beta.size()); }
  Index n3() const noexcept { return static_cast<Index>(interface_alpha.size()); }
};

class InterfaceMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws InterfaceMismatchError when the boxes do not share a full edge or
/// their boundary points on it do not coincide exactly.
SiblingIndexSets sibling_interface_sets(const BoxNode& alpha, std::span<const BoundaryPoint> alpha_boundary,
                                        const BoxNode& beta, std::span<const BoundaryPoint> beta_boundary);

/// Boundary points of a leaf in [south, east, north, west] order.
std::vector<BoundaryPoint> leaf_boundary_points(const Rect& rect, int n_c);

/// Coordinates of a leaf's discretization points in [boundary, interior] order.
std::vector<std::array<double, 2>> leaf_points(const Rect& rect, int n_c);

class BoxTree {
 public:
  /// levels >= 1 (root only when 1); n_c >= 4. Split axes alternate by level
  /// starting with a vertical cut at the root.
  static BoxTree build_uniform(const Rect& domain, int levels, int n_c);

  int levels() const noexcept { return levels_; }
  int leaf_level() const noexcept { return levels_ - 1; }
  int n_c() const noexcept { return n_c_; }
  int n_boxes() const noexcept { return static_cast<int>(nodes_.size()); }
  const Rect& domain() const noexcept { return nodes_.front().rect; }

  static int boxes_on_level(int level) noexcept { return 1 << level; }
  static int first_on_level(int level) noexcept { return 1 << level; }

  const BoxNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id - 1)); }
  std::span<const BoxNode> nodes() const noexcept { return nodes_; }

  std::span<const BoundaryPoint> boundary(int id) const { return boundaries_.at(static_cast<std::size_t>(id - 1)); }
  /// Interface sets for merging the children of a non-leaf box.
  const SiblingIndexSets& sibling_sets(int parent_id) const;
  const LeafIndexSets& leaf_sets() const noexcept { return leaf_sets_; }

  /// Number of distinct discretization points (the unknowns).
  Index n_points() const noexcept { return static_cast<Index>(points_.size()); }
  const std::vector<std::array<double, 2>>& points() const noexcept { return points_; }
  /// Global index of each local leaf point, in [boundary, interior] order.
  std::span<const Index> leaf_global_indices(int leaf_id) const;
  /// 1 where this leaf owns the point (shared edge points belong to the lower id).
  std::span<const std::uint8_t> leaf_ownership(int leaf_id) const;

  /// One line per box: "id level leaf xmin xmax ymin ymax alpha beta"
  /// (alpha/beta are "-" for leaves).
  std::string describe() const;

 private:
  int levels_ = 0;
  int n_c_ = 0;
  std::vector<BoxNode> nodes_;
  std::vector<std::vector<BoundaryPoint>> boundaries_;
  std::vector<SiblingIndexSets> sibling_sets_;  // indexed by id - 1; empty for leaves
  LeafIndexSets leaf_sets_;
  std::vector<std::array<double, 2>> points_;
  std::vector<std::vector<Index>> leaf_global_;
  std::vector<std::vector<std::uint8_t>> leaf_owned_;
};

}  // namespace hps

#pragma once

// Build stage (leaf operators, then merges level by level toward the root)
// and solve stage (upward sweep of particular fluxes, downward sweep of
// incoming impedance data, leaf reconstruction).

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hps/cmatrix.hpp"
#include "hps/geometry.hpp"
#include "hps/leaf.hpp"
#include "hps/merge.hpp"
#include "hps/problem.hpp"
#include "hps/thread_plan.hpp"

namespace hps {

struct LevelTiming {
  Stage stage;
  int level;
  int boxes;
  int outer;
  int inner;
  double seconds;
};

/// CSV with header "stage,level,boxes,theta_o,theta_i,seconds".
void write_level_timings_csv(std::ostream& os, const std::vector<LevelTiming>& rows);

struct StorageReport {
  int leaf_records = 0;
  int merge_records = 0;
  /// Boxes other than the root still holding a full ItI operator.
  int non_root_r_count = 0;
  bool root_r_present = false;
  /// Non-root merge records holding exactly {Φα, Φβ, W⁻¹, R33α, R33β, R13α, R23β}.
  int merge_records_with_exact_set = 0;
  /// Leaf records (non-root) holding exactly {Ψ, Y, Γ}.
  int leaf_records_with_exact_set = 0;
  std::size_t bytes = 0;
};

class SolverState {
 public:
  static SolverState build(const ProblemSpec& spec, int levels, int n_c, const ThreadPlan& plan);

  const BoxTree& tree() const noexcept { return *tree_; }
  double kappa() const noexcept { return kappa_; }
  cplx eta() const noexcept { return eta_; }
  /// Identifies the coefficient the operators were built with.
  std::uint64_t coefficient_fingerprint() const noexcept { return coefficient_fp_; }

  /// Leaf operators of a leaf box; throws for non-leaves.
  const LeafOperators& leaf(int id) const;
  /// Merge operators of a non-leaf box; throws for leaves.
  const MergeOperators& merged(int id) const;
  /// ItI operator of the whole domain.
  const CMatrix& root_r() const;

  const std::vector<LevelTiming>& build_timings() const noexcept { return build_timings_; }
  double build_seconds() const noexcept;
  const ThreadPlan& build_plan() const noexcept { return plan_; }

  StorageReport storage_report() const;
  /// Largest 1-norm condition estimate of the interface matrices W.
  double max_w_condition() const noexcept;

  /// Binary checkpoint (little-endian): magic "HPSCKPT\0", u32 version, i32
  /// n_c, i32 levels, f64 kappa, f64 eta re/im, u64 coefficient fingerprint,
  /// f64 domain[4], u64 box count,
  /// then per box (ascending id): i32 id, u8 kind (0 leaf, 1 merge), u8
  /// matrix count, for merges an f64 condition estimate of W, then each
  /// matrix as u64 rows, u64 cols, rows*cols complex
  /// doubles (re, im) in column-major order.
  void save(const std::string& path) const;
  static SolverState load(const std::string& path);

 private:
  std::shared_ptr<const BoxTree> tree_;
  double kappa_ = 0.0;
  cplx eta_;
  std::uint64_t coefficient_fp_ = 0;
  std::vector<std::optional<LeafOperators>> leaves_;    // by id - 1
  std::vector<std::optional<MergeOperators>> merges_;  // by id - 1
  std::vector<LevelTiming> build_timings_;
  ThreadPlan plan_;
};

struct Solution {
  CVector u;  // over the tree's global point numbering
  std::vector<LevelTiming> timings;
  double upward_seconds = 0.0;    // includes the leaf particular solves
  double downward_seconds = 0.0;  // includes the leaf reconstruction
  std::optional<double> e_inf;

  double solve_seconds() const noexcept { return upward_seconds + downward_seconds; }
};

/// FNV-1a over the bits of κ²c at every discretization point (0 when κ = 0,
/// where c does not enter the operator).
std::uint64_t coefficient_fingerprint(const BoxTree& tree, const ProblemSpec& spec);

/// ProblemSpec must share κ, η, the domain and the coefficient with the
/// build. Performs no factorizations.
Solution solve(const SolverState& state, const ProblemSpec& spec, const ThreadPlan& plan);

/// max |u_exact(x_j) - u_j| over all discretization points.
double max_error(const BoxTree& tree, const CVector& u, const ComplexField& exact);

/// Dense reference: every leaf's local unknowns, collocation rows in the
/// interior, impedance rows on the domain boundary and both impedance
/// matching conditions on shared edges, solved with one dense LU.
Solution global_direct_oracle(const ProblemSpec& spec, int levels, int n_c);

/// ItI operator of box `box_id` obtained by dense elimination of everything
/// inside it, rows and columns in the box's boundary order.
CMatrix oracle_iti(const ProblemSpec& spec, const BoxTree& tree, int box_id);

struct ResidualReport {
  double max_abs = 0.0;
  /// max_abs / (‖A‖∞ ‖u‖∞ + ‖s‖∞), 0 when the denominator vanishes.
  double scaled = 0.0;
};

/// Collocation residual -Δu - κ²cu - s at the interior points of the given
/// leaves (all leaves when the list is empty).
ResidualReport residual_check(const BoxTree& tree, const CVector& u, const ProblemSpec& spec,
                              const std::vector<int>& sample_leaves = {});

}  // namespace hps

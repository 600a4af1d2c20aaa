#pragma once

#include <map>
#include <memory>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "prodsys/grid.hpp"
#include "prodsys/linalg.hpp"

namespace prodsys {

// ---------------------------------------------------------------------------
// Connecting maps. Pure tensor models (grid CCR, inductive limits, amalgams)
// have identity connecting maps and tensor products have cell permutations;
// storing those structurally keeps the largest systems in memory while dense
// systems (truncations, loaded files) keep explicit matrices.
// ---------------------------------------------------------------------------

class BetaOp {
 public:
  enum class Kind { Identity, Perm, Dense };

  BetaOp() = default;
  static BetaOp identity(Eigen::Index dim);
  // out[i] = in[src[i]]; src must be a bijection
  static BetaOp perm(std::vector<Eigen::Index> src);
  static BetaOp dense(Mat m);

  Kind kind() const { return kind_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

  Vec apply(const Vec& x) const;
  Vec apply_adjoint(const Vec& y) const;
  Mat apply_cols(const Mat& x) const;
  Mat apply_adjoint_cols(const Mat& y) const;

  // this after other
  BetaOp compose(const BetaOp& other) const;
  BetaOp tensor(const BetaOp& other) const;
  BetaOp adjoint() const;

  Mat dense_matrix() const;  // materializes; SizeLimit above the entry cap

  double isometry_defect() const;  // ||b* b - I||
  bool is_square_unitary(double tol) const;

  // operator-norm distance ||a - b||; exact (no materialization) for
  // structured kinds
  static double distance(const BetaOp& a, const BetaOp& b);

 private:
  Kind kind_ = Kind::Identity;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::shared_ptr<const std::vector<Eigen::Index>> src_;
  std::shared_ptr<const Mat> mat_;
};

// ---------------------------------------------------------------------------
// Grid systems: spaces E_{m 2^-L} for m = 1..2^L plus connecting isometries
// beta(i,j) : E_{(i+j)d} -> E_{id} (x) E_{jd}.
// ---------------------------------------------------------------------------

enum class SystemKind { Inclusion, Product };

class GridSystem {
 public:
  GridSystem() = default;

  static GridSystem pure_tensor(int level, Eigen::Index cell_dim,
                                SystemKind kind = SystemKind::Product);
  static GridSystem stored(int level, std::vector<Eigen::Index> dims,
                           std::map<std::pair<int, int>, BetaOp> betas, SystemKind kind);

  int level() const { return level_; }
  int cells() const { return 1 << level_; }  // horizon is [0,1]
  SystemKind kind() const { return kind_; }
  bool pure() const { return pure_; }

  Eigen::Index dim(int m) const;           // dim E at m cells, 1 <= m <= cells()
  BetaOp beta(int i, int j) const;         // E_{i+j} -> E_i (x) E_j

  // composite map into the finest-partition coordinates E_delta^{(x) m}
  BetaOp to_finest(int m) const;

  DyadicTime delta() const { return DyadicTime(1, level_); }
  DyadicTime time(int m) const { return DyadicTime(m, level_); }

  nlohmann::json to_json() const;
  static GridSystem from_json(const nlohmann::json& j);

 private:
  int level_ = 0;
  SystemKind kind_ = SystemKind::Product;
  bool pure_ = false;
  Eigen::Index cell_dim_ = 0;
  std::vector<Eigen::Index> dims_;  // index m-1
  std::shared_ptr<const std::map<std::pair<int, int>, BetaOp>> betas_;
};

struct StructureReport {
  double isometry_defect = 0.0;
  double coassociativity_defect = 0.0;
  bool surjective = true;  // all connecting maps unitary
  bool passed = false;
};

StructureReport check_system(const GridSystem& sys, double tol = kTolIdentity);

// Dimension of the partition space E_s1 (x) ... (x) E_sn.
Eigen::Index partition_dim(const GridSystem& sys, const DyadicPartition& p);

// beta_{coarse,fine} : E_coarse -> E_fine, per-block composites tensored
// together. NotRefinement when fine does not refine coarse.
BetaOp beta_composite(const GridSystem& sys, const DyadicPartition& coarse,
                      const DyadicPartition& fine);

// ---------------------------------------------------------------------------
// Inductive limit over the finite directed set of grid partitions. The finest
// partition is its maximum, so the limit slice at m cells is E_delta^{(x) m}
// and the canonical injection of a partition space is the composite beta into
// the finest coordinates.
// ---------------------------------------------------------------------------

struct InductiveLimit {
  GridSystem prod;
  GridSystem source;

  BetaOp inject(const DyadicPartition& p) const;
  // canonical embedding of the slice at m cells, i_{(m)} = inject((m))
  BetaOp embed(int m) const;
};

InductiveLimit inductive_limit(const GridSystem& sys, double tol = kTolIdentity);

// ---------------------------------------------------------------------------
// Subsystem families. `level` may be coarser than the parent's; spaces are
// indexed by multiples of 2^-level and live in the parent slice coordinates.
// ---------------------------------------------------------------------------

struct SubsystemFamily {
  const GridSystem* parent = nullptr;
  int level = 0;
  std::vector<Subspace> spaces;  // index m-1, m = 1..2^level

  int cells() const { return 1 << level; }
  const Subspace& at(int m) const;
  // parent slice cell count of the m-th coarse time
  int parent_cells(int m) const;
};

SubsystemFamily full_family(const GridSystem& sys);
SubsystemFamily unit_line_family(const GridSystem& sys, const std::vector<Vec>& unit_values);

// Max defect of beta(F_{s+t}) <= F_s (x) F_t over pairs at the family's level.
double subsystem_defect(const SubsystemFamily& f);

// Smallest product subsystem containing the seed: per-cell spans tensored
// over the finest partition at the seed's level and pulled back.
SubsystemFamily generated_subsystem(const GridSystem& prod, const SubsystemFamily& seed,
                                    double tol = kTolIdentity);

// Same construction with the generating cells at a coarser level.
SubsystemFamily generated_at_level(const GridSystem& prod, const SubsystemFamily& seed,
                                   int coarse_level, double tol = kTolIdentity);

// The product subsystem with the given cell, tensored along the finest
// partition of the result level (the kernel behind both functions above).
SubsystemFamily generated_from_cell_subspace(const GridSystem& prod, const Subspace& cell,
                                             int result_level);

// ---------------------------------------------------------------------------
// Morphisms between systems of equal level.
// ---------------------------------------------------------------------------

struct Morphism {
  const GridSystem* source = nullptr;
  const GridSystem* target = nullptr;
  std::vector<Mat> maps;  // index m-1: source dim(m) -> target dim(m)
  bool contractive = false;

  const Mat& at(int m) const;
};

struct MorphismReport {
  double intertwining_defect = 0.0;
  double norm = 0.0;  // max over slices
  bool contractive_ok = true;
  bool passed = false;
};

MorphismReport check_morphism(const Morphism& m, double tol = kTolIdentity);

// ---------------------------------------------------------------------------
// Tensor product of systems and the cyclic flip.
// ---------------------------------------------------------------------------

GridSystem tensor_systems(const GridSystem& e, const GridSystem& f);

// Unitary on E_T swapping the factors under E_{T-t} (x) E_t ~ E_T ~ E_t (x) E_{T-t}.
BetaOp flip_unitary(const GridSystem& prod, const DyadicTime& big_t, const DyadicTime& t);

}  // namespace prodsys

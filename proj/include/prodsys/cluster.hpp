#pragma once

#include <cstdint>
#include <vector>

#include "prodsys/units.hpp"

namespace prodsys {

// ---------------------------------------------------------------------------
// Cluster construction. Two-scale rule: the split spaces below use every
// fine interior split, while the cluster is generated over coarse partitions
// only; at a single fine cell there is no interior split, which is exactly
// why a coarser observation scale is needed for a nondegenerate cluster.
// ---------------------------------------------------------------------------

// Span of x (x) y over all fine interior splits r of [0, t], with x and y
// orthogonal to the F slices on their halves.
Subspace split_pair_span(const GridSystem& ambient, const SubsystemFamily& f, int t_cells,
                         double tol = kTolIdentity);

// Orthogonal complement of split_pair_span in the slice at t.
Subspace split_pair_complement(const GridSystem& ambient, const SubsystemFamily& f, int t_cells,
                               double tol = kTolIdentity);

// Two-subsystem variant: x orthogonal to F1 on the left half, y orthogonal
// to F2 on the right half; returns the complement.
Subspace mixed_pair_complement(const GridSystem& ambient, const SubsystemFamily& f1,
                               const SubsystemFamily& f2, int t_cells,
                               double tol = kTolIdentity);

struct ClusterResult {
  int fine_level = 0;
  int coarse_level = 0;
  // durations of 1..q fine cells, q = fine cells per coarse cell
  std::vector<Subspace> f_tilde_block;
  std::vector<Subspace> f_prime_block;
  SubsystemFamily f_check;  // the cluster, on the coarse grid
};

ClusterResult cluster(const GridSystem& ambient, const SubsystemFamily& f, int coarse_level,
                      double tol = kTolIdentity);

// ---------------------------------------------------------------------------
// Random sets
// ---------------------------------------------------------------------------

struct FaithfulState {
  Mat density;  // positive definite, trace one

  double expectation(const Mat& x) const;
};

FaithfulState tracial_state(Eigen::Index dim);
FaithfulState diagonal_state(Eigen::Index dim, std::uint64_t seed);

// 1 (x) P_{F_{t-s}} (x) 1 on the top slice, in finest-partition coordinates.
// Cell counts are at the family's level.
Mat interval_projection(const GridSystem& ambient, const SubsystemFamily& f, int s_cells,
                        int t_cells);

// Same with an explicit middle subspace at the given fine duration.
Mat interval_projection_with(const GridSystem& ambient, const Subspace& mid, int s_cells,
                             int t_cells);

struct RandomSetDistribution {
  int cells = 0;
  std::vector<double> probs;  // indexed by occupied-cell bitmask
  std::string provenance;

  double prob(std::uint32_t mask) const { return probs[mask]; }
  double sum() const;
  double min() const;
  // P(Z avoids every cell of `mask`)
  double avoid(std::uint32_t mask) const;
};

// Exact avoidance probabilities eta(prod of interval projections) inverted
// over subsets; requires F to be a product subsystem and eta faithful.
RandomSetDistribution random_set_distribution(const GridSystem& ambient,
                                              const SubsystemFamily& f,
                                              const FaithfulState& eta,
                                              double tol = kTolIdentity);

struct AtMostOneReport {
  double measure_side = 0.0;   // mu(<= 1 point in [s,t])
  double state_side = 0.0;     // eta(1 (x) P_{F'_{t-s}} (x) 1)
  double difference = 0.0;
};

AtMostOneReport at_most_one_check(const GridSystem& ambient, const SubsystemFamily& f,
                                  const RandomSetDistribution& dist, const FaithfulState& eta,
                                  int s_cells, int t_cells, double tol = kTolIdentity);

struct PushforwardReport {
  double max_interval_difference = 0.0;  // avoidance of coarse interval families, two ways
  double total_variation = 0.0;          // pushed fine distribution vs cluster distribution
  double factorization_defect = 0.0;     // cluster projections vs per-coarse-cell products
};

// l(Z) = the set of coarse cells containing at least two fine points of Z.
std::uint32_t cluster_map(std::uint32_t fine_mask, int fine_level, int coarse_level);

PushforwardReport cluster_pushforward_check(const GridSystem& ambient, const SubsystemFamily& f,
                                            const FaithfulState& eta, int coarse_level,
                                            double tol = kTolIdentity);

// ---------------------------------------------------------------------------
// X spaces of a unit line: X_t = F'_t (-) C u_t
// ---------------------------------------------------------------------------

struct XSpaceReport {
  double padding_containment = 0.0;   // u (x) F' and F' (x) u inside the longer F'
  Eigen::Index dim_x_cell = 0;        // at one coarse cell
  Eigen::Index dim_x_two_cells = 0;
  double direct_sum_defect = 0.0;     // X_{2D} vs u (x) X (+) X (x) u
  double summand_orthogonality = 0.0;
  double shift_isometry_defect = 0.0;
  double shift_semigroup_defect = 0.0;
  // dim of the intersection of the shifted ranges drops by dim_x_cell per
  // step and reaches zero at the horizon; nothing survives every shift
  bool purity_decay = false;
  Eigen::Index last_window_dim = 0;
};

XSpaceReport x_space_checks(const GridSystem& ambient, const VectorFamily& u, int coarse_level,
                            double tol = kTolIdentity);

}  // namespace prodsys

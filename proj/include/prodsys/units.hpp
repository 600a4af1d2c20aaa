#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "prodsys/system.hpp"

namespace prodsys {

// A time-indexed family of vectors, one per grid time of its system.
struct VectorFamily {
  const GridSystem* sys = nullptr;
  std::vector<Vec> values;  // index m-1, m = 1..cells()

  const Vec& at(int m) const;
  const Vec& top() const { return values.back(); }  // value at time 1
};

struct UnitReport {
  double factorization_defect = 0.0;
  double min_norm = 0.0;
  double max_norm = 0.0;
  double growth_rate = 0.0;  // smallest k with ||u_t|| <= exp(t k) on the grid
  bool normalized = false;
  bool passed = false;
};

// Max of ||u_{s+t} - beta^*(u_s (x) u_t)|| over grid pairs. AllZero when the
// whole family vanishes.
UnitReport check_unit(const VectorFamily& u, double tol = kTolIdentity);

// The unit g, beta^*(g (x) g), ... generated by one cell vector.
VectorFamily unit_from_cell(const GridSystem& prod, const Vec& g);

// Lift of a unit along the inductive limit; the lifted value at m cells is
// the tensor power of the cell value in the limit coordinates.
VectorFamily lift_unit(const InductiveLimit& lim, const VectorFamily& u,
                       double tol = kTolIdentity);

// Pointwise application of the adjoint canonical embeddings i*_t.
VectorFamily restrict_family(const InductiveLimit& lim, const VectorFamily& fam);

// ---------------------------------------------------------------------------
// Additive units of a fixed unit
// ---------------------------------------------------------------------------

struct AdditiveFamily {
  VectorFamily unit;
  std::vector<Vec> values;

  const Vec& at(int m) const;
  const Vec& top() const { return values.back(); }
};

struct AdditiveReport {
  double additivity_defect = 0.0;
  double root_defect = 0.0;   // max |<a_t, u_t>|
  double growth_bound = 0.0;  // smallest k with ||a_t||^2 <= k (t + t^2)
  bool is_root = false;
  bool passed = false;
};

AdditiveReport check_additive(const AdditiveFamily& a, double tol = kTolIdentity);

// The additive family with cell value a_cell; on a grid product system the
// additivity recursion determines every later value.
AdditiveFamily additive_from_cell(const VectorFamily& unit, const Vec& a_cell);

// a_s = lambda s u_s + root_s with lambda = <u_1, a_1>; exact on the grid.
struct AdditiveDecomposition {
  Cplx lambda;
  AdditiveFamily root;
};
AdditiveDecomposition decompose_additive(const AdditiveFamily& a, double tol = kTolIdentity);

// <theta_s a_1, theta_s b_1> with theta_s = sqrt(s I + (s^2 - s)|u_1><u_1|);
// agrees with the direct inner product <a_s, b_s>.
Cplx gram_additive(const AdditiveFamily& a, const AdditiveFamily& b, const DyadicTime& s,
                   double tol = kTolIdentity);

// ---------------------------------------------------------------------------
// Root spaces
// ---------------------------------------------------------------------------

struct RootSpace {
  VectorFamily unit;
  Mat cell_basis;   // E_delta columns; families normalized under <a_1, b_1>
  Mat basis_at_1;   // values of the basis families at time 1

  Eigen::Index dimension() const { return cell_basis.cols(); }
};

// Solves the cell-level orthogonality system and extends additively; the
// basis is orthonormal for the root-space inner product <a,b> = <a_1,b_1>.
RootSpace root_space(const GridSystem& prod, const VectorFamily& u, double tol = kTolIdentity);

AdditiveFamily root_family(const RootSpace& rs, Eigen::Index i);

// Lift of an additive unit along the inductive limit; roots lift to roots.
AdditiveFamily lift_additive(const InductiveLimit& lim, const VectorFamily& u,
                             const AdditiveFamily& a, double tol = kTolIdentity);

// ---------------------------------------------------------------------------
// Type I part and index
// ---------------------------------------------------------------------------

// The inclusion family spanned by the unit together with all root pieces
// localized on subintervals (u ... a ... u products); generating it recovers
// the subsystem generated by the unit and its roots.
SubsystemFamily unit_root_family(const GridSystem& prod, const VectorFamily& u,
                                 const RootSpace& roots);

SubsystemFamily type_I_part(const GridSystem& prod, const VectorFamily& u,
                            double tol = kTolIdentity);

// dim of the root space of a normalized unit; sampled over three seeded units
// and asserted equal across them.
int index_of(const GridSystem& prod, std::uint64_t seed = 7, double tol = kTolIdentity);

// ---------------------------------------------------------------------------
// Serialization: {"times": [...], "vectors": [...]}
// ---------------------------------------------------------------------------

nlohmann::json family_to_json(const VectorFamily& f);
VectorFamily family_from_json(const nlohmann::json& j, const GridSystem& sys);

}  // namespace prodsys

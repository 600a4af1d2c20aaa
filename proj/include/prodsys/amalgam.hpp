#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "prodsys/units.hpp"

namespace prodsys {

// ---------------------------------------------------------------------------
// Amalgamated product of two product systems over a contractive morphism C.
// The cell is the Gram quotient of E_delta (+) F_delta under
// [[I, C],[C*, I]]; slices are its tensor powers and the embeddings are the
// per-cell quotient images tensored along the finest partition.
// ---------------------------------------------------------------------------

struct Amalgam {
  GridSystem g;                // pure tensor system over the quotient cell
  Mat i_cell;                  // E_delta -> G_delta
  Mat j_cell;                  // F_delta -> G_delta
  std::vector<Mat> i_maps;     // E_m -> G_m (index m-1)
  std::vector<Mat> j_maps;
  std::vector<Mat> c_maps;     // the defining morphism, F_m -> E_m

  const Mat& embed_left(int m) const { return i_maps[static_cast<std::size_t>(m - 1)]; }
  const Mat& embed_right(int m) const { return j_maps[static_cast<std::size_t>(m - 1)]; }
};

Amalgam amalgamate(const GridSystem& e, const GridSystem& f, const std::vector<Mat>& c_maps,
                   double tol = kTolIdentity);

struct AmalgamReport {
  double cross_defect = 0.0;        // max_m ||I_m^* J_m - C_m||
  double generation_defect = 0.0;   // cell + sampled word span vs identity
  double embedding_defect = 0.0;    // isometric-morphism defects of I, J
  bool passed = false;
};

AmalgamReport amalgam_check(const Amalgam& am, const GridSystem& e, const GridSystem& f,
                            double tol = kTolIdentity);

// ---------------------------------------------------------------------------
// Spatial product over normalized units: the amalgam over C = |u><v| plus its
// identification with the subsystem of the tensor product generated by
// E (x) v and u (x) F.
// ---------------------------------------------------------------------------

struct SpatialProduct {
  Amalgam am;
  std::shared_ptr<const GridSystem> tensor;
  SubsystemFamily join;            // generated inside *tensor
  Mat cell_identification;         // G_delta -> join cell coordinates, unitary
  double identification_defect = 0.0;
  double common_unit_defect = 0.0;  // max_m ||I_m u_m - J_m v_m||
};

SpatialProduct spatial_product(const GridSystem& e, const VectorFamily& u, const GridSystem& f,
                               const VectorFamily& v, double tol = kTolIdentity);

// Slice-projector comparison of the spatial join against the joins built from
// type I parts, and of the corollary join against the type I part of the
// tensor product.
struct TypeIGenerationReport {
  double spatial_vs_typeI_join = 0.0;   // (E (x) v) v (u (x) F)  vs  (E (x) F^I) v (E^I (x) F)
  double corollary_join_vs_mid = 0.0;   // (E^I (x) v) v (u (x) F^I)  vs  E^I (x) F^I
  double mid_vs_tensor_typeI = 0.0;     // E^I (x) F^I  vs  (E (x) F)^I
};

TypeIGenerationReport typeI_generation_check(const GridSystem& e, const VectorFamily& u,
                                             const GridSystem& f, const VectorFamily& v,
                                             double tol = kTolIdentity);

// ---------------------------------------------------------------------------
// Root-space behavior under amalgamation
// ---------------------------------------------------------------------------

// Quotient of H1 (+) H2 by the kernel of [[I, C1],[C1*, I]].
struct HilbertAmalgam {
  Eigen::Index dim_left = 0;
  Eigen::Index dim_right = 0;
  Mat cross;          // dim_left x dim_right contraction
  GramQuotient quotient;

  Eigen::Index dimension() const { return quotient.rank; }
};

HilbertAmalgam hilbert_amalgam(const Mat& cross, double tol = kTolIdentity);

struct RootAmalgamReport {
  Eigen::Index amalgam_root_dim = 0;    // dim of the root space of the common unit
  Eigen::Index hilbert_amalgam_rank = 0;
  double projector_commutation = 0.0;   // max_m ||[P_E, P_F]||
  double span_defect = 0.0;             // embedded factor roots vs amalgam roots
  double gram_defect = 0.0;             // |<I a, J b> - <a, C_1 b>| over root bases
  double common_unit_defect = 0.0;
  bool passed = false;
};

RootAmalgamReport root_amalgam_check(const GridSystem& e, const GridSystem& f,
                                     const std::vector<Mat>& c_maps, const VectorFamily& v,
                                     double tol = kTolIdentity);

struct TensorRootReport {
  Eigen::Index root_dim = 0;        // roots of u (x) v in E (x) F
  Eigen::Index block_dim = 0;       // dim of (R_u (x) v) (+) (u (x) R_v)
  double cross_gram = 0.0;          // max |<a (x) v, u (x) b>|
  double decomposition_residual = 0.0;  // basis roots against the two blocks
  double constructed_additivity = 0.0;  // a (x) v + u (x) b rechecked as additive
};

TensorRootReport tensor_root_check(const GridSystem& e, const VectorFamily& u,
                                   const GridSystem& f, const VectorFamily& v,
                                   double tol = kTolIdentity);

// ---------------------------------------------------------------------------
// Completely positive maps and the block Powers sum
// ---------------------------------------------------------------------------

class CPMap {
 public:
  CPMap() = default;
  CPMap(Eigen::Index in_dim, Eigen::Index out_dim, Mat choi);

  static CPMap identity(Eigen::Index n);
  static CPMap from_kraus(Eigen::Index in_dim, Eigen::Index out_dim,
                          const std::vector<Mat>& kraus);
  static CPMap ad(const Mat& u);  // X -> U X U*

  Eigen::Index in_dim() const { return in_; }
  Eigen::Index out_dim() const { return out_; }
  const Mat& choi() const { return choi_; }

  Mat apply(const Mat& x) const;
  CPMap compose(const CPMap& inner) const;  // this after inner

  double choi_min_eigenvalue() const;
  double unitality_defect() const;

  static double distance(const CPMap& a, const CPMap& b);

 private:
  Eigen::Index in_ = 0;
  Eigen::Index out_ = 0;
  Mat choi_;  // block (i,j) of size out x out holds the image of E_ij
};

// The block sum  [[phi(X), U Y V*],[V Z U*, psi(W)]]  on M_{n+m}.
CPMap powers_sum(const CPMap& phi, const CPMap& psi, const Mat& u, const Mat& v);

// max_A ||phi(A) U - U A|| over matrix units, the discrete intertwining
// relation of the summand semigroups.
double intertwining_defect(const CPMap& phi, const Mat& u);

struct CpReport {
  double choi_min_eigenvalue = 0.0;
  double unitality_defect = 0.0;
  double semigroup_defect = 0.0;  // max_m ||tau_1^(o m) - tau_m|| over the family
  bool cp = false;
  bool unital = false;
  bool passed = false;
};

// family[i] is the (i+1)-step map; semigroup defect compares iterated
// one-step composition against the supplied steps.
CpReport cp_checks(const std::vector<CPMap>& family, double tol = kTolIdentity);

// {"in_dim", "out_dim", "choi": operator payload}
nlohmann::json cpmap_to_json(const CPMap& m);
CPMap cpmap_from_json(const nlohmann::json& j);

}  // namespace prodsys

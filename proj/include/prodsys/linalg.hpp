#pragma once

#include <complex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <nlohmann/json_fwd.hpp>

namespace prodsys {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Default tolerances: identity-level algebra vs spectral-decomposition output.
inline constexpr double kTolIdentity = 1e-10;
inline constexpr double kTolSpectral = 1e-8;

enum class Errc {
  NotPSD,
  DimMismatch,
  TotalMismatch,
  LevelTooCoarse,
  LevelMismatch,
  LevelOrder,
  NotRefinement,
  NotInclusionSystem,
  NotSubsystem,
  NotProductSubsystem,
  NotAUnit,
  NotAdditive,
  NotNormalized,
  NotProduct,
  NoUnit,
  NotContractive,
  NotMorphism,
  NotPartialIsometry,
  UnitNotSupported,
  StateNotFaithful,
  OutOfRange,
  AllZero,
  SizeLimit,
  ShapeMismatch,
  UnknownSuite,
  BadInput,
  IOFailure,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void raise(Errc code, const std::string& what);

const char* errc_name(Errc code);

// ---------------------------------------------------------------------------
// Tensor products. Convention everywhere: the left factor is the slow index,
// i.e. (v (x) w)[i*dim(w)+j] = v[i]*w[j] (row-major Kronecker).
// ---------------------------------------------------------------------------

Vec tensor(const Vec& v, const Vec& w);
Mat tensor_op(const Mat& a, const Mat& b);

// ---------------------------------------------------------------------------
// Subspaces are stored as orthonormal column bases in ambient coordinates.
// ---------------------------------------------------------------------------

struct Subspace {
  Eigen::Index ambient = 0;
  Mat basis;  // ambient x rank, orthonormal columns (rank may be 0)

  Eigen::Index rank() const { return basis.cols(); }
};

// Modified Gram-Schmidt with re-orthogonalization; columns whose residual
// falls below tol * (largest input column norm) are dropped.
Subspace orthonormalize(const Mat& span_cols, Eigen::Index ambient, double tol = kTolIdentity);
Subspace orthonormalize(const std::vector<Vec>& vs, Eigen::Index ambient, double tol = kTolIdentity);

Mat projector(const Subspace& s);

// Orthogonal complement within the ambient space.
Subspace complement(const Subspace& s, double tol = kTolIdentity);

// Smallest subspace containing both arguments.
Subspace subspace_union(const Subspace& a, const Subspace& b, double tol = kTolIdentity);

// Intersection via principal angles: directions whose cosine is 1 within tol.
Subspace subspace_intersection(const Subspace& a, const Subspace& b, double tol = kTolIdentity);

// Operator-norm distance between the two orthogonal projectors, computed in
// the joint column space so the ambient dimension never enters quadratically.
double projector_distance(const Subspace& a, const Subspace& b);

// max_i ||(1 - P_sup) inner_i|| over the columns of inner's basis: 0 iff
// inner is contained in sup.
double containment_defect(const Subspace& inner, const Subspace& sup);

Subspace tensor_subspace(const Subspace& a, const Subspace& b);

// ---------------------------------------------------------------------------
// Hermitian kernels
// ---------------------------------------------------------------------------

// Hermitian PSD square root; eigenvalues in [-tol*max, 0) are clipped to 0.
Mat psd_sqrt(const Mat& a, double tol = kTolSpectral);

struct GramQuotient {
  Mat q;                 // rank x n with q^* q = clipped gram
  Eigen::Index rank = 0;
};

// Quotient map of a PSD Gram form by its numerical null space.
GramQuotient gram_kernel(const Mat& gram, double tol = kTolIdentity);

double operator_norm(const Mat& a);
double min_hermitian_eigenvalue(const Mat& a);

// ---------------------------------------------------------------------------
// Seeded random inputs (reproducible test vectors and states)
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double real();                      // uniform in [-1, 1]
  Cplx scalar();
  Vec vector(Eigen::Index dim);
  Vec unit_vector(Eigen::Index dim);
  Mat matrix(Eigen::Index rows, Eigen::Index cols);
  Mat unitary(Eigen::Index dim);
  Mat psd(Eigen::Index dim);

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// JSON serialization: vectors as {"dim","re","im"}, operators as
// {"rows","cols","re","im"}, row-major.
// ---------------------------------------------------------------------------

nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);
nlohmann::json mat_to_json(const Mat& m);
Mat mat_from_json(const nlohmann::json& j);

}  // namespace prodsys

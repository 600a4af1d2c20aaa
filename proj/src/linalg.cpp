#include "prodsys/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace prodsys {

void raise(Errc code, const std::string& what) {
  throw Error(code, std::string(errc_name(code)) + ": " + what);
}

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::NotPSD: return "NotPSD";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::TotalMismatch: return "TotalMismatch";
    case Errc::LevelTooCoarse: return "LevelTooCoarse";
    case Errc::LevelMismatch: return "LevelMismatch";
    case Errc::LevelOrder: return "LevelOrder";
    case Errc::NotRefinement: return "NotRefinement";
    case Errc::NotInclusionSystem: return "NotInclusionSystem";
    case Errc::NotSubsystem: return "NotSubsystem";
    case Errc::NotProductSubsystem: return "NotProductSubsystem";
    case Errc::NotAUnit: return "NotAUnit";
    case Errc::NotAdditive: return "NotAdditive";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::NotProduct: return "NotProduct";
    case Errc::NoUnit: return "NoUnit";
    case Errc::NotContractive: return "NotContractive";
    case Errc::NotMorphism: return "NotMorphism";
    case Errc::NotPartialIsometry: return "NotPartialIsometry";
    case Errc::UnitNotSupported: return "UnitNotSupported";
    case Errc::StateNotFaithful: return "StateNotFaithful";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::AllZero: return "AllZero";
    case Errc::SizeLimit: return "SizeLimit";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::UnknownSuite: return "UnknownSuite";
    case Errc::BadInput: return "BadInput";
    case Errc::IOFailure: return "IOFailure";
  }
  return "Unknown";
}

Vec tensor(const Vec& v, const Vec& w) {
  Vec out(v.size() * w.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.segment(i * w.size(), w.size()) = v[i] * w;
  return out;
}

Mat tensor_op(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Subspace orthonormalize(const Mat& span_cols, Eigen::Index ambient, double tol) {
  if (span_cols.size() > 0 && span_cols.rows() != ambient)
    raise(Errc::DimMismatch, "spanning vectors do not live in the ambient space");
  double scale = 0.0;
  for (Eigen::Index j = 0; j < span_cols.cols(); ++j)
    scale = std::max(scale, span_cols.col(j).norm());
  if (scale == 0.0) return Subspace{ambient, Mat(ambient, 0)};

  Mat basis(ambient, span_cols.cols());
  Eigen::Index rank = 0;
  for (Eigen::Index j = 0; j < span_cols.cols(); ++j) {
    Vec v = span_cols.col(j);
    // two passes of projection keep the basis orthonormal to machine precision
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < rank; ++i)
        v -= basis.col(i).dot(v) * basis.col(i);
    double n = v.norm();
    if (n > tol * scale) basis.col(rank++) = v / n;
  }
  basis.conservativeResize(Eigen::NoChange, rank);
  return Subspace{ambient, std::move(basis)};
}

Subspace orthonormalize(const std::vector<Vec>& vs, Eigen::Index ambient, double tol) {
  Mat cols(ambient, static_cast<Eigen::Index>(vs.size()));
  for (std::size_t j = 0; j < vs.size(); ++j) {
    if (vs[j].size() != ambient)
      raise(Errc::DimMismatch, "spanning vectors do not live in the ambient space");
    cols.col(static_cast<Eigen::Index>(j)) = vs[j];
  }
  return orthonormalize(cols, ambient, tol);
}

Mat projector(const Subspace& s) {
  if (s.rank() == 0) return Mat::Zero(s.ambient, s.ambient);
  return s.basis * s.basis.adjoint();
}

Subspace complement(const Subspace& s, double tol) {
  Mat cols(s.ambient, s.ambient + s.rank());
  cols.leftCols(s.rank()) = s.basis;
  cols.rightCols(s.ambient) = Mat::Identity(s.ambient, s.ambient);
  Subspace full = orthonormalize(cols, s.ambient, tol);
  // the first rank() columns reproduce s; the rest span its complement
  Subspace out{s.ambient, full.basis.rightCols(full.rank() - s.rank())};
  return out;
}

Subspace subspace_union(const Subspace& a, const Subspace& b, double tol) {
  if (a.ambient != b.ambient) raise(Errc::DimMismatch, "subspace union across ambients");
  Mat cols(a.ambient, a.rank() + b.rank());
  cols.leftCols(a.rank()) = a.basis;
  cols.rightCols(b.rank()) = b.basis;
  return orthonormalize(cols, a.ambient, tol);
}

Subspace subspace_intersection(const Subspace& a, const Subspace& b, double tol) {
  if (a.ambient != b.ambient) raise(Errc::DimMismatch, "intersection across ambients");
  if (a.rank() == 0 || b.rank() == 0) return Subspace{a.ambient, Mat(a.ambient, 0)};
  Mat overlap = a.basis.adjoint() * b.basis;
  Eigen::JacobiSVD<Mat> svd(overlap, Eigen::ComputeThinV);
  std::vector<Vec> dirs;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] >= 1.0 - tol) dirs.push_back(b.basis * svd.matrixV().col(i));
  return orthonormalize(dirs, a.ambient, tol);
}

double projector_distance(const Subspace& a, const Subspace& b) {
  if (a.ambient != b.ambient) raise(Errc::DimMismatch, "projector distance across ambients");
  if (a.rank() == 0 && b.rank() == 0) return 0.0;
  Subspace joint = subspace_union(a, b, 1e-14);
  Mat qa = joint.basis.adjoint() * a.basis;  // r x ra
  Mat qb = joint.basis.adjoint() * b.basis;
  Mat diff = qa * qa.adjoint() - qb * qb.adjoint();
  return operator_norm(diff);
}

double containment_defect(const Subspace& inner, const Subspace& sup) {
  if (inner.ambient != sup.ambient) raise(Errc::DimMismatch, "containment across ambients");
  double worst = 0.0;
  for (Eigen::Index j = 0; j < inner.rank(); ++j) {
    Vec v = inner.basis.col(j);
    if (sup.rank() > 0) v -= sup.basis * (sup.basis.adjoint() * v);
    worst = std::max(worst, v.norm());
  }
  return worst;
}

Subspace tensor_subspace(const Subspace& a, const Subspace& b) {
  Subspace out;
  out.ambient = a.ambient * b.ambient;
  out.basis = tensor_op(a.basis, b.basis);
  return out;
}

Mat psd_sqrt(const Mat& a, double tol) {
  if (a.rows() != a.cols()) raise(Errc::DimMismatch, "psd_sqrt of a non-square operator");
  if (a.rows() == 0) return a;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()));
  const auto& ev = es.eigenvalues();
  double scale = std::max(ev.size() ? std::abs(ev[ev.size() - 1]) : 0.0, 1.0);
  Eigen::VectorXd clipped = ev;
  for (Eigen::Index i = 0; i < clipped.size(); ++i) {
    if (clipped[i] < -tol * scale)
      raise(Errc::NotPSD, "operator has an eigenvalue below -tol");
    clipped[i] = std::sqrt(std::max(clipped[i], 0.0));
  }
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
}

GramQuotient gram_kernel(const Mat& gram, double tol) {
  if (gram.rows() != gram.cols()) raise(Errc::DimMismatch, "gram form must be square");
  if (gram.rows() == 0) return GramQuotient{Mat(0, 0), 0};
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (gram + gram.adjoint()));
  const auto& ev = es.eigenvalues();
  double scale = ev.size() ? std::max(std::abs(ev[ev.size() - 1]), 0.0) : 0.0;
  if (scale == 0.0) return GramQuotient{Mat(0, gram.cols()), 0};
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] < -tol * scale) raise(Errc::NotPSD, "gram form is indefinite beyond tol");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > tol * scale) keep.push_back(i);

  GramQuotient out;
  out.rank = static_cast<Eigen::Index>(keep.size());
  out.q = Mat(out.rank, gram.cols());
  for (Eigen::Index r = 0; r < out.rank; ++r)
    out.q.row(r) = std::sqrt(ev[keep[r]]) * es.eigenvectors().col(keep[r]).adjoint();
  return out;
}

double operator_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()[0];
}

double min_hermitian_eigenvalue(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()));
  return es.eigenvalues()[0];
}

double Rng::real() {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  return d(gen_);
}

Cplx Rng::scalar() {
  double re = real();
  double im = real();
  return Cplx(re, im);
}

Vec Rng::vector(Eigen::Index dim) {
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = scalar();
  return v;
}

Vec Rng::unit_vector(Eigen::Index dim) {
  Vec v = vector(dim);
  double n = v.norm();
  while (n < 1e-6) {
    v = vector(dim);
    n = v.norm();
  }
  return v / n;
}

Mat Rng::matrix(Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scalar();
  return m;
}

Mat Rng::unitary(Eigen::Index dim) {
  Mat m = matrix(dim, dim);
  Eigen::HouseholderQR<Mat> qr(m);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  // fix the phase so the factorization is unique
  for (Eigen::Index i = 0; i < dim; ++i) {
    Cplx d = r(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

Mat Rng::psd(Eigen::Index dim) {
  Mat m = matrix(dim, dim);
  return m * m.adjoint();
}

namespace {

nlohmann::json split_complex(const Mat& m) {
  std::vector<double> re, im;
  re.reserve(m.size());
  im.reserve(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      re.push_back(m(i, j).real());
      im.push_back(m(i, j).imag());
    }
  return nlohmann::json{{"re", re}, {"im", im}};
}

}  // namespace

nlohmann::json vec_to_json(const Vec& v) {
  nlohmann::json j = split_complex(v);
  j["dim"] = v.size();
  return j;
}

Vec vec_from_json(const nlohmann::json& j) {
  Eigen::Index dim = j.at("dim").get<Eigen::Index>();
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (static_cast<Eigen::Index>(re.size()) != dim || static_cast<Eigen::Index>(im.size()) != dim)
    raise(Errc::BadInput, "vector payload length does not match dim");
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    v[i] = Cplx(re[i].get<double>(), im[i].get<double>());
  return v;
}

nlohmann::json mat_to_json(const Mat& m) {
  nlohmann::json j = split_complex(m);
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  return j;
}

Mat mat_from_json(const nlohmann::json& j) {
  Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (static_cast<Eigen::Index>(re.size()) != rows * cols)
    raise(Errc::BadInput, "operator payload length does not match shape");
  Mat m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j2 = 0; j2 < cols; ++j2, ++k)
      m(i, j2) = Cplx(re[k].get<double>(), im[k].get<double>());
  return m;
}

}  // namespace prodsys

#include "prodsys/units.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace prodsys {

const Vec& VectorFamily::at(int m) const {
  if (m < 1 || m > static_cast<int>(values.size())) raise(Errc::OutOfRange, "family time index");
  return values[static_cast<std::size_t>(m - 1)];
}

const Vec& AdditiveFamily::at(int m) const {
  if (m < 1 || m > static_cast<int>(values.size())) raise(Errc::OutOfRange, "family time index");
  return values[static_cast<std::size_t>(m - 1)];
}

UnitReport check_unit(const VectorFamily& u, double tol) {
  const GridSystem& sys = *u.sys;
  UnitReport rep;
  rep.min_norm = rep.max_norm = u.at(1).norm();
  bool all_zero = true;
  for (int m = 1; m <= sys.cells(); ++m) {
    double n = u.at(m).norm();
    rep.min_norm = std::min(rep.min_norm, n);
    rep.max_norm = std::max(rep.max_norm, n);
    if (n > 0) rep.growth_rate = std::max(rep.growth_rate, std::log(n) / sys.time(m).value());
    if (n > tol) all_zero = false;
  }
  if (all_zero) raise(Errc::AllZero, "every family value vanishes");
  for (int i = 1; i < sys.cells(); ++i)
    for (int j = 1; i + j <= sys.cells(); ++j) {
      Vec prod = sys.beta(i, j).apply_adjoint(tensor(u.at(i), u.at(j)));
      rep.factorization_defect =
          std::max(rep.factorization_defect, (u.at(i + j) - prod).norm());
    }
  rep.normalized = rep.min_norm >= 1.0 - tol && rep.max_norm <= 1.0 + tol;
  rep.passed = rep.factorization_defect <= tol;
  return rep;
}

VectorFamily unit_from_cell(const GridSystem& prod, const Vec& g) {
  if (g.size() != prod.dim(1)) raise(Errc::DimMismatch, "cell vector dimension");
  VectorFamily u;
  u.sys = &prod;
  u.values.push_back(g);
  for (int m = 2; m <= prod.cells(); ++m)
    u.values.push_back(prod.beta(m - 1, 1).apply_adjoint(tensor(u.at(m - 1), g)));
  return u;
}

VectorFamily lift_unit(const InductiveLimit& lim, const VectorFamily& u, double tol) {
  UnitReport rep = check_unit(u, tol);
  if (!rep.passed) raise(Errc::NotAUnit, "family fails the unit factorization");
  VectorFamily out;
  out.sys = &lim.prod;
  Vec value = u.at(1);
  out.values.push_back(value);
  for (int m = 2; m <= lim.prod.cells(); ++m) {
    value = tensor(value, u.at(1));
    out.values.push_back(value);
  }
  return out;
}

VectorFamily restrict_family(const InductiveLimit& lim, const VectorFamily& fam) {
  VectorFamily out;
  out.sys = &lim.source;
  for (int m = 1; m <= lim.source.cells(); ++m)
    out.values.push_back(lim.embed(m).apply_adjoint(fam.at(m)));
  return out;
}

AdditiveReport check_additive(const AdditiveFamily& a, double tol) {
  const VectorFamily& u = a.unit;
  const GridSystem& sys = *u.sys;
  AdditiveReport rep;
  for (int i = 1; i < sys.cells(); ++i)
    for (int j = 1; i + j <= sys.cells(); ++j) {
      Vec sum = tensor(a.at(i), u.at(j)) + tensor(u.at(i), a.at(j));
      Vec pulled = sys.beta(i, j).apply_adjoint(sum);
      rep.additivity_defect = std::max(rep.additivity_defect, (a.at(i + j) - pulled).norm());
    }
  for (int m = 1; m <= sys.cells(); ++m) {
    rep.root_defect = std::max(rep.root_defect, std::abs(u.at(m).dot(a.at(m))));
    double t = sys.time(m).value();
    rep.growth_bound = std::max(rep.growth_bound, a.at(m).squaredNorm() / (t + t * t));
  }
  rep.is_root = rep.root_defect <= tol;
  rep.passed = rep.additivity_defect <= tol;
  return rep;
}

AdditiveFamily additive_from_cell(const VectorFamily& unit, const Vec& a_cell) {
  const GridSystem& sys = *unit.sys;
  if (a_cell.size() != sys.dim(1)) raise(Errc::DimMismatch, "cell vector dimension");
  AdditiveFamily a;
  a.unit = unit;
  a.values.push_back(a_cell);
  for (int m = 2; m <= sys.cells(); ++m) {
    Vec sum = tensor(a.at(m - 1), unit.at(1)) + tensor(unit.at(m - 1), a_cell);
    a.values.push_back(sys.beta(m - 1, 1).apply_adjoint(sum));
  }
  return a;
}

AdditiveDecomposition decompose_additive(const AdditiveFamily& a, double tol) {
  const VectorFamily& u = a.unit;
  UnitReport urep = check_unit(u, tol);
  if (!urep.normalized) raise(Errc::NotNormalized, "decomposition requires a normalized unit");
  const GridSystem& sys = *u.sys;
  AdditiveDecomposition dec;
  dec.lambda = u.top().dot(a.top());
  dec.root.unit = u;
  for (int m = 1; m <= sys.cells(); ++m) {
    double t = sys.time(m).value();
    dec.root.values.push_back(a.at(m) - dec.lambda * t * u.at(m));
  }
  return dec;
}

Cplx gram_additive(const AdditiveFamily& a, const AdditiveFamily& b, const DyadicTime& s,
                   double tol) {
  const VectorFamily& u = a.unit;
  UnitReport urep = check_unit(u, tol);
  if (!urep.normalized) raise(Errc::NotNormalized, "gram interpolation requires a normalized unit");
  double sv = s.value();
  if (sv > 1.0) raise(Errc::OutOfRange, "gram interpolation is stated for s <= 1");
  const Vec& u1 = u.top();
  Mat theta_sq = sv * Mat::Identity(u1.size(), u1.size()) +
                 (sv * sv - sv) * (u1 * u1.adjoint());
  Mat theta = psd_sqrt(theta_sq, kTolSpectral);
  Vec ta = theta * a.top();
  Vec tb = theta * b.top();
  return ta.dot(tb);
}

RootSpace root_space(const GridSystem& prod, const VectorFamily& u, double tol) {
  if (prod.kind() != SystemKind::Product) raise(Errc::NotProduct, "roots live in product systems");
  UnitReport urep = check_unit(u, tol);
  if (!urep.normalized) raise(Errc::NotNormalized, "root spaces are stated for normalized units");

  // all cell vectors orthogonal to u_delta extend additively
  Mat ucol(u.at(1).size(), 1);
  ucol.col(0) = u.at(1);
  Subspace uline = orthonormalize(ucol, ucol.rows(), tol);
  Subspace cell = complement(uline, tol);

  RootSpace rs;
  rs.unit = u;
  double scale = 1.0 / std::sqrt(static_cast<double>(prod.cells()));
  rs.cell_basis = cell.basis * scale;
  rs.basis_at_1 = Mat(prod.dim(prod.cells()), rs.cell_basis.cols());
  for (Eigen::Index c = 0; c < rs.cell_basis.cols(); ++c) {
    AdditiveFamily fam = additive_from_cell(u, rs.cell_basis.col(c));
    AdditiveReport rep = check_additive(fam, tol);
    if (!rep.passed || !rep.is_root)
      raise(Errc::NotAdditive, "root solver produced an invalid family");
    rs.basis_at_1.col(c) = fam.top();
  }
  return rs;
}

AdditiveFamily root_family(const RootSpace& rs, Eigen::Index i) {
  if (i < 0 || i >= rs.dimension()) raise(Errc::OutOfRange, "root basis index");
  return additive_from_cell(rs.unit, rs.cell_basis.col(i));
}

AdditiveFamily lift_additive(const InductiveLimit& lim, const VectorFamily& u,
                             const AdditiveFamily& a, double tol) {
  AdditiveReport rep = check_additive(a, tol);
  if (!rep.passed) raise(Errc::NotAdditive, "family fails the additivity identity");
  VectorFamily lifted_unit = lift_unit(lim, u, tol);
  return additive_from_cell(lifted_unit, a.at(1));
}

SubsystemFamily unit_root_family(const GridSystem& prod, const VectorFamily& u,
                                 const RootSpace& roots) {
  SubsystemFamily w;
  w.parent = &prod;
  w.level = prod.level();
  std::vector<AdditiveFamily> fams;
  for (Eigen::Index i = 0; i < roots.dimension(); ++i) fams.push_back(root_family(roots, i));

  for (int m = 1; m <= prod.cells(); ++m) {
    std::vector<Vec> cols;
    cols.push_back(u.at(m));
    // root pieces localized on [j delta, j' delta], padded by the unit
    for (int j = 0; j < m; ++j)
      for (int jp = j + 1; jp <= m; ++jp) {
        DyadicPartition whole;
        whole.durations.push_back(DyadicTime(m, prod.level()));
        DyadicPartition blocks;
        if (j > 0) blocks.durations.push_back(DyadicTime(j, prod.level()));
        blocks.durations.push_back(DyadicTime(jp - j, prod.level()));
        if (m - jp > 0) blocks.durations.push_back(DyadicTime(m - jp, prod.level()));
        BetaOp b = beta_composite(prod, whole, blocks);
        for (const auto& fam : fams) {
          Vec piece = fam.at(jp - j);
          if (j > 0) piece = tensor(u.at(j), piece);
          if (m - jp > 0) piece = tensor(piece, u.at(m - jp));
          cols.push_back(b.apply_adjoint(piece));
        }
      }
    w.spaces.push_back(orthonormalize(cols, prod.dim(m)));
  }
  return w;
}

SubsystemFamily type_I_part(const GridSystem& prod, const VectorFamily& u, double tol) {
  UnitReport urep = check_unit(u, tol);
  if (!urep.normalized) raise(Errc::NotNormalized, "type I part is stated for normalized units");
  RootSpace roots = root_space(prod, u, tol);
  SubsystemFamily seed = unit_root_family(prod, u, roots);
  return generated_subsystem(prod, seed, std::max(tol, 1e-9));
}

int index_of(const GridSystem& prod, std::uint64_t seed, double tol) {
  if (prod.kind() != SystemKind::Product) raise(Errc::NotProduct, "index of a non-product system");
  if (prod.dim(1) < 1) raise(Errc::NoUnit, "no factorizing cell vector");
  Rng rng(seed);
  std::optional<Eigen::Index> dim;
  for (int trial = 0; trial < 3; ++trial) {
    VectorFamily u = unit_from_cell(prod, rng.unit_vector(prod.dim(1)));
    RootSpace rs = root_space(prod, u, tol);
    if (dim && *dim != rs.dimension())
      raise(Errc::NoUnit, "sampled units disagree on the root dimension");
    dim = rs.dimension();
  }
  return static_cast<int>(*dim);
}

nlohmann::json family_to_json(const VectorFamily& f) {
  nlohmann::json times = nlohmann::json::array();
  nlohmann::json vectors = nlohmann::json::array();
  for (int m = 1; m <= static_cast<int>(f.values.size()); ++m) {
    times.push_back(f.sys->time(m).str());
    vectors.push_back(vec_to_json(f.at(m)));
  }
  return nlohmann::json{{"times", times}, {"vectors", vectors}};
}

VectorFamily family_from_json(const nlohmann::json& j, const GridSystem& sys) {
  VectorFamily f;
  f.sys = &sys;
  for (const auto& v : j.at("vectors")) f.values.push_back(vec_from_json(v));
  if (static_cast<int>(f.values.size()) != sys.cells())
    raise(Errc::BadInput, "family does not cover every grid time");
  return f;
}

}  // namespace prodsys

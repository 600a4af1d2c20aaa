#include "prodsys/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>

#include <nlohmann/json.hpp>

#include "prodsys/amalgam.hpp"
#include "prodsys/ccr.hpp"
#include "prodsys/cluster.hpp"

namespace prodsys {

namespace {

constexpr Eigen::Index kExactDistributionDimCap = 2048;

struct CheckList {
  std::vector<Check>* out;

  void defect(const std::string& name, const std::string& ref, double measured, double tol) {
    out->push_back(Check{name, ref, measured <= tol, measured, tol});
  }
  void equals(const std::string& name, const std::string& ref, double got, double want) {
    double diff = std::abs(got - want);
    out->push_back(Check{name, ref, diff == 0.0, diff, 0.0});
  }
  void flag(const std::string& name, const std::string& ref, bool ok) {
    out->push_back(Check{name, ref, ok, ok ? 0.0 : 1.0, 0.0});
  }
};

Mat hcat(const Mat& a, const Mat& b) {
  Mat out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

VectorFamily scaled_family(const VectorFamily& u, Cplx lambda) {
  VectorFamily out;
  out.sys = u.sys;
  for (int m = 1; m <= static_cast<int>(u.values.size()); ++m) {
    double t = u.sys->time(m).value();
    out.values.push_back(std::exp(lambda * t) * u.at(m));
  }
  return out;
}

// dense copy of a structured system, for exercising the stored-matrix paths
GridSystem densified(const GridSystem& sys) {
  std::vector<Eigen::Index> dims;
  for (int m = 1; m <= sys.cells(); ++m) dims.push_back(sys.dim(m));
  std::map<std::pair<int, int>, BetaOp> betas;
  for (int i = 1; i < sys.cells(); ++i)
    for (int j = 1; i + j <= sys.cells(); ++j)
      betas[{i, j}] = BetaOp::dense(sys.beta(i, j).dense_matrix());
  return GridSystem::stored(sys.level(), std::move(dims), std::move(betas), sys.kind());
}

// second-quantized cell isometry between two grid flows (value-space map v)
std::vector<Mat> ccr_morphism(const GridCcr& from, const GridCcr& to, const Mat& value_map) {
  Mat cell = Mat::Zero(to.cell_dim(), from.cell_dim());
  cell(0, 0) = 1.0;
  cell.block(1, 1, to.k, from.k) = value_map;
  std::vector<Mat> maps;
  Mat power = cell;
  for (int m = 1; m <= from.sys.cells(); ++m) {
    maps.push_back(power);
    if (m < from.sys.cells()) power = tensor_op(power, cell);
  }
  return maps;
}

// ---------------------------------------------------------------------------
// system-checks
// ---------------------------------------------------------------------------

void suite_system_checks(const SuiteConfig& cfg, CheckList& cl) {
  GridCcr ccr = ccr_build(cfg.k, cfg.level, cfg.slice_cap);
  StructureReport rep = check_system(ccr.sys, cfg.tol_identity);
  cl.defect("system.ccr-isometry", "connecting-map-isometry", rep.isometry_defect, 1e-12);
  cl.defect("system.ccr-coassociativity", "coassociativity", rep.coassociativity_defect, 1e-12);
  cl.flag("system.ccr-unitary", "product-system-surjectivity", rep.surjective);

  int lvl = std::min(cfg.level, 2);
  GridCcr small = ccr_build(cfg.k, lvl, cfg.slice_cap);
  GridSystem trunc = ccr_truncate(small, 1);
  StructureReport trep = check_system(trunc, cfg.tol_identity);
  cl.defect("system.truncated-isometry", "connecting-map-isometry", trep.isometry_defect, 1e-12);
  cl.defect("system.truncated-coassociativity", "coassociativity", trep.coassociativity_defect,
            1e-12);
  cl.flag("system.truncated-not-surjective", "inclusion-proper", !trep.surjective);

  {
    // corrupt one connecting map entry and require the check to fail
    std::vector<Eigen::Index> dims;
    for (int m = 1; m <= trunc.cells(); ++m) dims.push_back(trunc.dim(m));
    std::map<std::pair<int, int>, BetaOp> betas;
    for (int i = 1; i < trunc.cells(); ++i)
      for (int j = 1; i + j <= trunc.cells(); ++j) {
        Mat b = trunc.beta(i, j).dense_matrix();
        if (i == 1 && j == 1) b(0, 0) += 1e-3;
        betas[{i, j}] = BetaOp::dense(std::move(b));
      }
    GridSystem bad = GridSystem::stored(trunc.level(), std::move(dims), std::move(betas),
                                        SystemKind::Inclusion);
    StructureReport brep = check_system(bad, cfg.tol_identity);
    cl.flag("system.fault-detected", "structure-check-sensitivity",
            brep.isometry_defect > 1e-4 || brep.coassociativity_defect > 1e-4);
  }

  {
    GridCcr other = ccr_build(1, lvl, cfg.slice_cap);
    GridSystem prod = tensor_systems(small.sys, other.sys);
    StructureReport prep = check_system(prod, cfg.tol_identity);
    cl.defect("system.tensor-isometry", "connecting-map-isometry", prep.isometry_defect, 1e-12);
    cl.defect("system.tensor-coassociativity", "coassociativity", prep.coassociativity_defect,
              1e-12);
    double dim_diff = 0.0;
    for (int m = 1; m <= prod.cells(); ++m)
      dim_diff += std::abs(static_cast<double>(prod.dim(m)) -
                           std::pow((1.0 + cfg.k) * 2.0, m));
    cl.equals("system.tensor-dims", "slice-dimension-product", dim_diff, 0.0);
  }

  {
    // chain law for composite connecting maps on a stored system
    DyadicTime one(1, 0);
    DyadicPartition whole;
    whole.durations.push_back(one);
    DyadicPartition mid;
    mid.durations.push_back(DyadicTime(1, 1));
    mid.durations.push_back(DyadicTime(1, 1));
    DyadicPartition fine = finest(one, lvl);
    BetaOp direct = beta_composite(trunc, whole, fine);
    BetaOp chained = beta_composite(trunc, mid, fine).compose(beta_composite(trunc, whole, mid));
    cl.defect("system.composite-chain-law", "connecting-map-composition",
              BetaOp::distance(direct, chained), 1e-12);
  }

  {
    DyadicTime one(1, 0);
    InductiveLimit lim = inductive_limit(trunc, cfg.tol_identity);
    StructureReport lrep = check_system(lim.prod, cfg.tol_identity);
    cl.defect("system.limit-structure", "inductive-limit-product", lrep.isometry_defect +
              lrep.coassociativity_defect, 1e-12);
    cl.equals("system.limit-top-dim", "inductive-limit-dimension",
              static_cast<double>(lim.prod.dim(lim.prod.cells())),
              std::pow(1.0 + cfg.k, 1 << lvl));

    double inj = 0.0;
    auto parts = all_partitions(one, lvl);
    for (const auto& coarse : parts)
      for (const auto& finer : parts) {
        auto w = refines(coarse, finer);
        if (!w) continue;
        // i_fine  after  beta_{coarse,fine}  =  i_coarse
        BetaOp lhs = lim.inject(finer).compose(beta_composite(trunc, coarse, finer));
        inj = std::max(inj, BetaOp::distance(lhs, lim.inject(coarse)));
      }
    cl.defect("system.injection-consistency", "canonical-injection-coherence", inj, 1e-12);

    {
      // limit splitting against the tensor of injections
      DyadicPartition p = finest(DyadicTime(1, 1), lvl);
      DyadicPartition q = finest(DyadicTime(1, 1), lvl);
      int half = 1 << (lvl - 1);
      BetaOp lhs = lim.prod.beta(half, half).compose(lim.inject(concat(p, q)));
      BetaOp rhs = lim.inject(p).tensor(lim.inject(q));
      cl.defect("system.coproduct-identity", "injection-splitting", BetaOp::distance(lhs, rhs),
                1e-12);
    }

    {
      // partition-space linking maps against source composites
      int half = 1 << (lvl - 1);
      DyadicPartition s2;
      s2.durations.push_back(DyadicTime(1, 1));
      s2.durations.push_back(DyadicTime(1, 1));
      DyadicPartition t4 = finest(one, lvl);
      BetaOp i_blocks = lim.embed(half).tensor(lim.embed(half));
      BetaOp left = beta_composite(lim.prod, s2, t4).compose(i_blocks);
      BetaOp i_cells = lim.embed(1);
      for (int c = 1; c < (1 << lvl); ++c) i_cells = i_cells.tensor(lim.embed(1));
      BetaOp right = i_cells.compose(beta_composite(trunc, s2, t4));
      cl.defect("system.link-identity", "partition-linking-maps", BetaOp::distance(left, right),
                1e-12);
    }
  }

  {
    BetaOp flip = flip_unitary(ccr.sys, DyadicTime(2, ccr.level), DyadicTime(1, ccr.level));
    cl.defect("system.flip-unitary", "factor-swap-unitarity", flip.isometry_defect(), 1e-12);
    BetaOp twice = flip.compose(flip);
    cl.defect("system.flip-involution", "factor-swap-involution",
              BetaOp::distance(twice, BetaOp::identity(twice.rows())), 1e-12);
    VectorFamily u = ccr_vacuum(ccr);
    Vec flipped = flip.apply(u.at(2));
    cl.defect("system.flip-fixes-unit", "factor-swap-on-units", (flipped - u.at(2)).norm(),
              1e-12);
  }
}

// ---------------------------------------------------------------------------
// units
// ---------------------------------------------------------------------------

void suite_units(const SuiteConfig& cfg, CheckList& cl) {
  GridCcr ccr = ccr_build(cfg.k, cfg.level, cfg.slice_cap);
  VectorFamily vac = ccr_vacuum(ccr);
  UnitReport vrep = check_unit(vac, cfg.tol_identity);
  cl.defect("units.vacuum-factorization", "unit-factorization", vrep.factorization_defect, 1e-12);
  cl.flag("units.vacuum-normalized", "unit-normalization", vrep.normalized);

  {
    VectorFamily scaled = scaled_family(vac, Cplx(0.3, 0.0));
    UnitReport srep = check_unit(scaled, cfg.tol_identity);
    cl.defect("units.scaled-still-unit", "unit-exponential-rescaling", srep.factorization_defect,
              1e-12);
    cl.flag("units.scaled-not-normalized", "unit-normalization", !srep.normalized);
  }

  {
    VectorFamily bad = vac;
    bad.values[static_cast<std::size_t>(bad.values.size() / 2)] *= 1.5;
    UnitReport brep = check_unit(bad, cfg.tol_identity);
    cl.flag("units.fault-detected", "unit-check-sensitivity", brep.factorization_defect > 1e-4);
  }

  int lvl = std::min(cfg.level, 2);
  GridCcr small = ccr_build(cfg.k, lvl, cfg.slice_cap);
  GridSystem trunc = ccr_truncate(small, 1);
  InductiveLimit lim = inductive_limit(trunc, cfg.tol_identity);

  {
    Rng rng(cfg.seed + 11);
    double down_up = 0.0, up_down = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      VectorFamily limit_unit = unit_from_cell(lim.prod, rng.unit_vector(lim.prod.dim(1)));
      VectorFamily restricted = restrict_family(lim, limit_unit);
      UnitReport rrep = check_unit(restricted, cfg.tol_identity);
      if (!rrep.passed) up_down = 1.0;
      VectorFamily lifted = lift_unit(lim, restricted, cfg.tol_identity);
      for (int m = 1; m <= lim.prod.cells(); ++m)
        up_down = std::max(up_down, (lifted.at(m) - limit_unit.at(m)).norm());
      VectorFamily back = restrict_family(lim, lifted);
      for (int m = 1; m <= trunc.cells(); ++m)
        down_up = std::max(down_up, (back.at(m) - restricted.at(m)).norm());
    }
    cl.defect("units.lift-then-restrict", "unit-lifting-bijection", down_up, 1e-10);
    cl.defect("units.restrict-then-lift", "unit-lifting-bijection", up_down, 1e-10);
  }

  {
    AdditiveFamily trivial = additive_from_cell(vac, Cplx(2.0, 0.0) * ccr.delta() * vac.at(1));
    AdditiveReport trep = check_additive(trivial, cfg.tol_identity);
    cl.defect("units.additive-trivial", "additive-unit-law", trep.additivity_defect, 1e-12);
    cl.flag("units.additive-trivial-not-root", "root-orthogonality", !trep.is_root);

    Vec c = Vec::Zero(ccr.k);
    c[0] = 1.0;
    AdditiveFamily root = vacuum_root(ccr, c);
    AdditiveReport rrep = check_additive(root, cfg.tol_identity);
    cl.defect("units.additive-root", "additive-unit-law", rrep.additivity_defect, 1e-12);
    cl.flag("units.additive-root-flag", "root-orthogonality", rrep.is_root);

    AdditiveFamily sum = root;
    for (int m = 1; m <= ccr.sys.cells(); ++m)
      sum.values[static_cast<std::size_t>(m - 1)] += trivial.at(m);
    AdditiveReport srep = check_additive(sum, cfg.tol_identity);
    cl.defect("units.additive-sum", "additive-unit-vector-space", srep.additivity_defect, 1e-12);

    // recover both parts of a trivial + root mixture
    Cplx lambda(0.7, 0.2);
    AdditiveFamily mix = additive_from_cell(vac, lambda * ccr.delta() * vac.at(1) + root.at(1));
    AdditiveDecomposition dec = decompose_additive(mix, cfg.tol_identity);
    double resid = std::abs(dec.lambda - lambda);
    for (int m = 1; m <= ccr.sys.cells(); ++m)
      resid = std::max(resid, (dec.root.at(m) - root.at(m)).norm());
    cl.defect("units.decompose-mixture", "trivial-plus-root-decomposition", resid, 1e-12);
    AdditiveReport drep = check_additive(dec.root, cfg.tol_identity);
    cl.flag("units.decomposed-root-flag", "root-orthogonality", drep.is_root);
  }

  {
    Rng rng(cfg.seed + 13);
    double theta_defect = 0.0, linear_defect = 0.0;
    std::vector<AdditiveFamily> fams;
    for (int i = 0; i < 5; ++i)
      fams.push_back(additive_from_cell(vac, rng.vector(ccr.cell_dim())));
    for (std::size_t i = 0; i < fams.size(); ++i)
      for (std::size_t j = i; j < fams.size(); ++j)
        for (int m = 1; m <= ccr.sys.cells(); ++m) {
          Cplx direct = fams[i].at(m).dot(fams[j].at(m));
          Cplx interp = gram_additive(fams[i], fams[j], ccr.sys.time(m), cfg.tol_identity);
          theta_defect = std::max(theta_defect, std::abs(direct - interp));
        }
    cl.defect("units.gram-interpolation", "additive-gram-interpolation", theta_defect, 1e-10);

    Vec c = rng.vector(ccr.k);
    Vec c2 = rng.vector(ccr.k);
    AdditiveFamily r1 = vacuum_root(ccr, c);
    AdditiveFamily r2 = vacuum_root(ccr, c2);
    for (int m = 1; m <= ccr.sys.cells(); ++m) {
      double s = ccr.sys.time(m).value();
      linear_defect = std::max(
          linear_defect, std::abs(r1.at(m).dot(r2.at(m)) - s * Cplx(r1.top().dot(r2.top()))));
    }
    cl.defect("units.root-gram-linearity", "root-gram-linearity", linear_defect, 1e-10);

    AdditiveFamily triv = additive_from_cell(vac, ccr.delta() * vac.at(1));
    double sq = 0.0;
    for (int m = 1; m <= ccr.sys.cells(); ++m) {
      double s = ccr.sys.time(m).value();
      sq = std::max(sq, std::abs(triv.at(m).dot(triv.at(m)) - Cplx(s * s)));
    }
    cl.defect("units.gram-trivial-square", "trivial-additive-gram", sq, 1e-10);

    Cplx lam(0.4, -0.1);
    VectorFamily su = scaled_family(vac, lam);
    AdditiveFamily sa;
    sa.unit = su;
    for (int m = 1; m <= ccr.sys.cells(); ++m) {
      double t = ccr.sys.time(m).value();
      sa.values.push_back(std::exp(lam * t) * r1.at(m));
    }
    AdditiveReport srep = check_additive(sa, cfg.tol_identity);
    cl.defect("units.rescale-equivariance", "additive-exponential-rescaling",
              srep.additivity_defect, 1e-12);
  }

  {
    // vacuum root of the truncated system lifts to the flow's vacuum root
    VectorFamily tvac = restrict_family(lim, unit_from_cell(lim.prod, [&] {
                          Vec g = Vec::Zero(1 + cfg.k);
                          g[0] = 1.0;
                          return g;
                        }()));
    Vec c = Vec::Zero(cfg.k);
    c[0] = 1.0;
    Vec root_cell = Vec::Zero(1 + cfg.k);
    root_cell.segment(1, cfg.k) = std::sqrt(1.0 / (1 << lvl)) * c;
    AdditiveFamily ta = additive_from_cell(tvac, root_cell);
    AdditiveReport tarep = check_additive(ta, cfg.tol_identity);
    cl.defect("units.truncated-root", "additive-unit-law", tarep.additivity_defect, 1e-12);
    AdditiveFamily lifted = lift_additive(lim, tvac, ta, cfg.tol_identity);
    AdditiveFamily expected = vacuum_root(small, c);
    double diff = 0.0;
    for (int m = 1; m <= small.sys.cells(); ++m)
      diff = std::max(diff, (lifted.at(m) - expected.at(m)).norm());
    cl.defect("units.lift-additive", "additive-lifting-bijection", diff, 1e-10);

    AdditiveFamily other = additive_from_cell(lifted.unit, 2.0 * root_cell);
    double dist = 0.0;
    for (int m = 1; m <= small.sys.cells(); ++m)
      dist = std::max(dist, (other.at(m) - lifted.at(m)).norm());
    cl.flag("units.lift-additive-injective", "additive-lifting-bijection", dist > 1e-6);
  }

  {
    RootSpace rs = root_space(ccr.sys, vac, cfg.tol_identity);
    double closure = 0.0;
    for (Eigen::Index i = 0; i < rs.dimension(); ++i) {
      AdditiveReport rrep = check_additive(root_family(rs, i), cfg.tol_identity);
      closure = std::max(closure, rrep.additivity_defect + rrep.root_defect);
    }
    cl.defect("units.root-space-closure", "root-space-solver", closure, 1e-12);
    Mat gram = rs.basis_at_1.adjoint() * rs.basis_at_1;
    cl.defect("units.root-space-gram", "root-space-inner-product",
              operator_norm(gram - Mat::Identity(gram.rows(), gram.cols())), 1e-10);
  }
}

// ---------------------------------------------------------------------------
// ccr-roots
// ---------------------------------------------------------------------------

void suite_ccr_roots(const SuiteConfig& cfg, CheckList& cl) {
  GridCcr ccr = ccr_build(cfg.k, cfg.level, cfg.slice_cap);
  VectorFamily vac = ccr_vacuum(ccr);

  RootSpace rs = solve_vacuum_roots(ccr);
  cl.equals("ccr.vacuum-root-dim", "vacuum-root-space", static_cast<double>(rs.dimension()),
            cfg.k);

  {
    std::vector<Vec> chis;
    for (int i = 0; i < cfg.k; ++i) {
      Vec c = Vec::Zero(cfg.k);
      c[i] = 1.0;
      chis.push_back(vacuum_root(ccr, c).at(1));
    }
    Subspace chi_span = orthonormalize(chis, ccr.cell_dim());
    Subspace solver_span = orthonormalize(rs.cell_basis, ccr.cell_dim());
    cl.defect("ccr.vacuum-root-basis", "constant-density-roots",
              projector_distance(chi_span, solver_span), 1e-12);

    double closure = 0.0;
    for (Eigen::Index i = 0; i < rs.dimension(); ++i) {
      AdditiveReport rep = check_additive(root_family(rs, i), cfg.tol_identity);
      closure = std::max(closure, rep.additivity_defect + rep.root_defect);
    }
    cl.defect("ccr.vacuum-root-residual", "root-space-solver", closure, 1e-12);
  }

  cl.equals("ccr.index", "root-dimension-index", static_cast<double>(index_of(ccr.sys, cfg.seed)),
            cfg.k);

  {
    Rng rng(cfg.seed + 17);
    Vec c = rng.vector(cfg.k);
    AdditiveFamily a = vacuum_root(ccr, c);
    double norm_defect = 0.0;
    for (int m = 1; m <= ccr.sys.cells(); ++m) {
      double expect = ccr.sys.time(m).value() * c.squaredNorm();
      norm_defect = std::max(norm_defect, std::abs(a.at(m).squaredNorm() - expect));
    }
    cl.defect("ccr.root-norm-linear", "root-gram-linearity", norm_defect, 1e-12);

    // one-particle coordinates satisfy a_t = a_r + S_r a_{t-r}
    auto one_particle = [&](const Vec& value, int m) {
      Vec coords = Vec::Zero(static_cast<Eigen::Index>(m) * ccr.k);
      for (int cell = 0; cell < m; ++cell)
        for (int v = 0; v < ccr.k; ++v) {
          CcrBasisElement el;
          el.occupied = 1u << cell;
          el.values = {v};
          coords[cell * ccr.k + v] = value[ccr_encode(ccr, m, el)];
        }
      return coords;
    };
    int t = ccr.sys.cells(), r = t / 2;
    Vec lhs = one_particle(a.at(t), t);
    Vec rhs = Vec::Zero(lhs.size());
    rhs.head(r * ccr.k) = one_particle(a.at(r), r);
    rhs += shift(ccr, r, t) * one_particle(a.at(t - r), t - r);
    cl.defect("ccr.root-shift-identity", "root-shift-decomposition", (lhs - rhs).norm(), 1e-12);
  }

  {
    Mat s1 = shift(ccr, 1, ccr.sys.cells());
    Mat g = s1.adjoint() * s1;
    cl.defect("ccr.shift-isometry", "shift-semigroup-isometry",
              operator_norm(g - Mat::Identity(g.rows(), g.cols())), 1e-12);
    if (ccr.sys.cells() >= 3) {
      Mat s2 = shift(ccr, 1, ccr.sys.cells() - 1);
      Mat s12 = shift(ccr, 2, ccr.sys.cells());
      cl.defect("ccr.shift-semigroup", "shift-semigroup-isometry", operator_norm(s1 * s2 - s12),
                1e-12);
    }
    double leak = 0.0;
    for (Eigen::Index col = 0; col < s1.cols(); ++col)
      for (int v = 0; v < ccr.k; ++v) leak = std::max(leak, std::abs(s1(v, col)));
    cl.defect("ccr.shift-range", "shift-pure-no-unitary-part", leak, 0.0);
  }

  {
    Rng rng(cfg.seed + 19);
    StepFunction f, g;
    for (int c = 0; c < ccr.sys.cells(); ++c) {
      f.cell_values.push_back(rng.vector(cfg.k));
      g.cell_values.push_back(rng.vector(cfg.k));
    }
    StepFunction zero;
    for (int c = 0; c < ccr.sys.cells(); ++c) zero.cell_values.push_back(Vec::Zero(cfg.k));
    cl.defect("ccr.exp-zero-vacuum", "exponential-vector-embedding",
              (exp_vector(ccr, zero, ccr.sys.cells()) - vac.top()).norm(), 1e-12);

    Cplx direct = exp_vector(ccr, f, ccr.sys.cells()).dot(exp_vector(ccr, g, ccr.sys.cells()));
    Cplx formula(1.0, 0.0);
    for (int c = 0; c < ccr.sys.cells(); ++c)
      formula *= Cplx(1.0, 0.0) + ccr.delta() * f.at_cell(c).dot(g.at_cell(c));
    cl.defect("ccr.exp-gram-product", "exponential-vector-gram", std::abs(direct - formula),
              1e-12);

    int s = ccr.sys.cells() / 2;
    Vec whole = exp_vector(ccr, f, ccr.sys.cells());
    StepFunction tail;
    for (int c = s; c < ccr.sys.cells(); ++c) tail.cell_values.push_back(f.at_cell(c));
    Vec split = tensor(exp_vector(ccr, f, s), exp_vector(ccr, tail, ccr.sys.cells() - s));
    cl.defect("ccr.exp-factorization", "exponential-vector-splitting",
              (ccr.sys.beta(s, ccr.sys.cells() - s).apply(whole) - split).norm(), 1e-12);
  }

  {
    // scalar-model discretization trend of the exponential gram
    auto gram_error = [](int level) {
      int cells = 1 << level;
      double delta = 1.0 / cells;
      double prod = std::pow(1.0 + delta, cells);
      return std::abs(prod - std::exp(1.0));
    };
    double e3 = gram_error(3), e4 = gram_error(4), e5 = gram_error(5);
    double worst = std::max(std::abs(e4 / e3 - 0.5), std::abs(e5 / e4 - 0.5));
    cl.defect("ccr.exp-gram-trend", "riemann-product-convergence", worst, 0.1);
  }

  cl.equals("ccr.poisson-empty", "poisson-quadrature-weight", poisson_weight(0u, 0.125), 1.0);
  cl.equals("ccr.poisson-pair", "poisson-quadrature-weight", poisson_weight(0b101u, 0.125),
            1.0 / 64.0);

  {
    // configuration-function representation reproduces the model inner product
    Rng rng(cfg.seed + 23);
    double worst = 0.0;
    int m = ccr.sys.cells();
    for (int trial = 0; trial < 5; ++trial) {
      Vec x = rng.vector(ccr.sys.dim(m));
      Vec y = rng.vector(ccr.sys.dim(m));
      Cplx config_sum(0.0, 0.0);
      for (Eigen::Index flat = 0; flat < ccr.sys.dim(m); ++flat) {
        CcrBasisElement el = ccr_decode(ccr, m, flat);
        double w = poisson_weight(el.occupied, ccr.delta());
        double scale = std::pow(ccr.delta(), static_cast<double>(el.values.size()));
        // function value = coefficient / delta^{n/2}, Poisson weight delta^n
        config_sum += w * std::conj(x[flat]) * y[flat] / scale;
      }
      worst = std::max(worst, std::abs(config_sum - Cplx(x.dot(y))));
    }
    cl.defect("ccr.poisson-inner-product", "configuration-representation", worst, 1e-12);
  }

  {
    int lvl = std::min(cfg.level, 2);
    GridCcr small = ccr_build(cfg.k, lvl, cfg.slice_cap);
    GridSystem t1 = ccr_truncate(small, 1);
    double dim_diff = 0.0;
    for (int m = 1; m <= t1.cells(); ++m)
      dim_diff += std::abs(static_cast<double>(t1.dim(m)) - (1.0 + m * cfg.k));
    cl.equals("ccr.truncate-one-dims", "configuration-count", dim_diff, 0.0);
    GridSystem t0 = ccr_truncate(small, 0);
    double ones = 0.0;
    for (int m = 1; m <= t0.cells(); ++m) ones += std::abs(static_cast<double>(t0.dim(m)) - 1.0);
    cl.equals("ccr.truncate-zero-dims", "configuration-count", ones, 0.0);
    GridSystem tfull = ccr_truncate(small, small.sys.cells());
    cl.flag("ccr.truncate-full-product", "truncation-saturation",
            tfull.kind() == SystemKind::Product);
  }
}

// ---------------------------------------------------------------------------
// amalgam-spatial
// ---------------------------------------------------------------------------

void suite_amalgam_spatial(const SuiteConfig& cfg, CheckList& cl) {
  int lvl = std::min(cfg.level, 2);
  GridCcr e = ccr_build(cfg.k, lvl, cfg.slice_cap);
  GridCcr f = ccr_build(1, lvl, cfg.slice_cap);
  VectorFamily u = ccr_vacuum(e);
  VectorFamily v = ccr_vacuum(f);

  SpatialProduct sp = spatial_product(e.sys, u, f.sys, v, cfg.tol_identity);
  cl.defect("amalgam.spatial-identification", "spatial-product-identification",
            sp.identification_defect, 1e-8);
  cl.defect("amalgam.spatial-common-unit", "common-unit-identification", sp.common_unit_defect,
            1e-10);

  AmalgamReport arep = amalgam_check(sp.am, e.sys, f.sys, cfg.tol_identity);
  cl.defect("amalgam.cross-inner-product", "amalgam-cross-inner-product", arep.cross_defect,
            1e-10);
  cl.defect("amalgam.generation", "amalgam-generation", arep.generation_defect, 1e-10);
  cl.defect("amalgam.embeddings", "amalgam-isometric-embeddings", arep.embedding_defect, 1e-10);

  double dims = 0.0;
  for (int m = 1; m <= sp.am.g.cells(); ++m)
    dims += std::abs(static_cast<double>(sp.am.g.dim(m)) -
                     std::pow(static_cast<double>(e.cell_dim() + f.cell_dim() - 1), m));
  cl.equals("amalgam.spatial-dims", "spatial-product-dimension", dims, 0.0);

  {
    // orthogonal amalgam over the zero morphism
    std::vector<Mat> zero;
    for (int m = 1; m <= e.sys.cells(); ++m)
      zero.push_back(Mat::Zero(e.sys.dim(m), f.sys.dim(m)));
    Amalgam am0 = amalgamate(e.sys, f.sys, zero, cfg.tol_identity);
    cl.equals("amalgam.zero-morphism-dim", "orthogonal-amalgam",
              static_cast<double>(am0.g.dim(1)),
              static_cast<double>(e.cell_dim() + f.cell_dim()));
    cl.defect("amalgam.zero-morphism-cross", "orthogonal-amalgam",
              operator_norm(am0.i_cell.adjoint() * am0.j_cell), 1e-12);
  }

  {
    // one-dimensional systems with a strict contraction between the units
    GridSystem le = GridSystem::pure_tensor(lvl, 1, SystemKind::Product);
    GridSystem lf = GridSystem::pure_tensor(lvl, 1, SystemKind::Product);
    Vec gu(1), gv(1);
    gu[0] = 0.9;
    gv[0] = 0.8;
    VectorFamily lu = unit_from_cell(le, gu);
    VectorFamily lv = unit_from_cell(lf, gv);
    std::vector<Mat> c;
    for (int m = 1; m <= le.cells(); ++m) c.push_back(lu.at(m) * lv.at(m).adjoint());
    Amalgam am = amalgamate(le, lf, c, cfg.tol_identity);
    cl.equals("amalgam.contraction-line-dim", "strict-contraction-amalgam",
              static_cast<double>(am.g.dim(1)), 2.0);
    cl.equals("amalgam.contraction-line-index", "strict-contraction-amalgam",
              static_cast<double>(index_of(am.g, cfg.seed)), 1.0);
  }

  {
    // independence of the reference units: a unit-matching cell unitary
    // carries one amalgam's generated-word grams onto the other's
    Vec g2 = Vec::Zero(f.cell_dim());
    g2[0] = 1.0 / std::sqrt(2.0);
    g2[1] = 1.0 / std::sqrt(2.0);
    VectorFamily u2 = unit_from_cell(e.sys, [&] {
      Vec g = Vec::Zero(e.cell_dim());
      g[0] = 1.0 / std::sqrt(2.0);
      g[1] = 1.0 / std::sqrt(2.0);
      return g;
    }());
    VectorFamily v2 = unit_from_cell(f.sys, g2);
    SpatialProduct sp2 = spatial_product(e.sys, u2, f.sys, v2, cfg.tol_identity);
    cl.equals("amalgam.unit-independence-dims", "spatial-product-unit-independence",
              static_cast<double>(sp2.am.g.dim(1)), static_cast<double>(sp.am.g.dim(1)));

    auto unit_frame = [](const Amalgam& am, const Vec& uv) {
      Vec sigma = am.i_cell * uv;
      Subspace line = orthonormalize(Mat(sigma), sigma.size());
      Subspace rest = complement(line);
      return hcat(line.basis, rest.basis);
    };
    Mat fa = unit_frame(sp.am, u.at(1));
    Mat fb = unit_frame(sp2.am, u2.at(1));
    Mat t = fb * fa.adjoint();
    double defect = operator_norm(Mat(t.adjoint() * t) - Mat::Identity(t.cols(), t.cols()));
    Vec sa = sp.am.i_cell * u.at(1);
    Vec sb = sp2.am.i_cell * u2.at(1);
    defect = std::max(defect, (t * sa - sb).norm());
    // two-letter word grams through t (x) t
    Mat words_a = hcat(tensor_op(Mat(sa), Mat(sa)), tensor_op(hcat(sp.am.i_cell, sp.am.j_cell),
                                                              hcat(sp.am.i_cell, sp.am.j_cell)));
    Mat mapped = tensor_op(t, t) * words_a;
    defect = std::max(defect, operator_norm(Mat(mapped.adjoint() * mapped) -
                                            Mat(words_a.adjoint() * words_a)));
    cl.defect("amalgam.unit-independence-gram", "spatial-product-unit-independence", defect,
              1e-8);
  }
}

// ---------------------------------------------------------------------------
// amalgam-partial
// ---------------------------------------------------------------------------

void suite_amalgam_partial(const SuiteConfig& cfg, CheckList& cl) {
  int lvl = std::min(cfg.level, 2);
  GridCcr e = ccr_build(2, lvl, cfg.slice_cap);
  GridCcr f = ccr_build(1, lvl, cfg.slice_cap);
  VectorFamily v = ccr_vacuum(f);

  {
    Mat embed = Mat::Zero(2, 1);
    embed(0, 0) = 1.0;
    std::vector<Mat> c = ccr_morphism(f, e, embed);
    RootAmalgamReport rep = root_amalgam_check(e.sys, f.sys, c, v, cfg.tol_identity);
    cl.equals("partial.embedding-root-dim", "partial-isometry-root-sum",
              static_cast<double>(rep.amalgam_root_dim), 2.0);
    cl.equals("partial.embedding-rank-match", "partial-isometry-root-sum",
              static_cast<double>(rep.amalgam_root_dim),
              static_cast<double>(rep.hilbert_amalgam_rank));
    cl.defect("partial.embedding-span", "partial-isometry-root-sum", rep.span_defect, 1e-10);
    cl.defect("partial.embedding-gram", "amalgam-cross-inner-product", rep.gram_defect, 1e-10);
    cl.defect("partial.projector-commutation", "slice-projector-commutation",
              rep.projector_commutation, 1e-10);
    cl.defect("partial.common-unit", "common-unit-identification", rep.common_unit_defect, 1e-10);
  }

  {
    // unitary morphism of a flow onto itself keeps the root dimension
    GridCcr g = ccr_build(cfg.k, lvl, cfg.slice_cap);
    std::vector<Mat> c = ccr_morphism(g, g, Mat::Identity(cfg.k, cfg.k));
    RootAmalgamReport rep = root_amalgam_check(g.sys, g.sys, c, ccr_vacuum(g), cfg.tol_identity);
    cl.equals("partial.unitary-root-dim", "partial-isometry-root-sum",
              static_cast<double>(rep.amalgam_root_dim), cfg.k);
    cl.flag("partial.unitary-rank-match", "partial-isometry-root-sum",
            rep.amalgam_root_dim == rep.hilbert_amalgam_rank && rep.passed);
  }

  {
    // rank-one morphism between the vacua: root spaces add orthogonally
    VectorFamily u = ccr_vacuum(e);
    std::vector<Mat> c;
    for (int m = 1; m <= e.sys.cells(); ++m) c.push_back(u.at(m) * v.at(m).adjoint());
    RootAmalgamReport rep = root_amalgam_check(e.sys, f.sys, c, v, cfg.tol_identity);
    cl.equals("partial.rank-one-root-dim", "unit-morphism-orthogonal-sum",
              static_cast<double>(rep.amalgam_root_dim), 3.0);
    cl.defect("partial.rank-one-span", "unit-morphism-orthogonal-sum", rep.span_defect, 1e-10);
  }

  {
    // strict contraction on unit lines: the root-sum description must fail
    GridSystem le = GridSystem::pure_tensor(lvl, 1, SystemKind::Product);
    GridSystem lf = GridSystem::pure_tensor(lvl, 1, SystemKind::Product);
    Vec gu(1), gv(1);
    gu[0] = 0.9;
    gv[0] = 0.8;
    VectorFamily lu = unit_from_cell(le, gu);
    VectorFamily lv = unit_from_cell(lf, gv);
    std::vector<Mat> c;
    for (int m = 1; m <= le.cells(); ++m) c.push_back(lu.at(m) * lv.at(m).adjoint());
    Amalgam am = amalgamate(le, lf, c, cfg.tol_identity);
    VectorFamily sigma = unit_from_cell(am.g, [&] {
      Vec s = am.i_cell * gu;
      return Vec(s / s.norm());
    }());
    RootSpace rg = root_space(am.g, sigma, cfg.tol_identity);
    cl.equals("partial.contraction-root-dim", "strict-contraction-amalgam",
              static_cast<double>(rg.dimension()), 1.0);
    // both factors are unit lines with no roots at all
    HilbertAmalgam ha = hilbert_amalgam(Mat::Zero(0, 0), cfg.tol_identity);
    cl.flag("partial.contraction-breaks-sum", "partial-isometry-necessity",
            rg.dimension() != ha.dimension());
  }
}

// ---------------------------------------------------------------------------
// powers
// ---------------------------------------------------------------------------

void suite_powers(const SuiteConfig& cfg, CheckList& cl) {
  {
    CPMap id2 = CPMap::identity(2);
    CPMap id3 = CPMap::identity(3);
    CPMap tau = powers_sum(id2, id3, Mat::Identity(2, 2), Mat::Identity(3, 3));
    cl.defect("powers.identity-choi", "block-sum-positivity", -tau.choi_min_eigenvalue(), 1e-10);
    cl.defect("powers.identity-unital", "block-sum-unitality", tau.unitality_defect(), 1e-10);
    cl.defect("powers.identity-map", "block-sum-identity",
              CPMap::distance(tau, CPMap::identity(5)), 1e-12);
  }

  Rng rng(cfg.seed + 29);
  Mat a = rng.unitary(3);
  Mat b = rng.unitary(2);

  {
    std::vector<CPMap> family;
    Mat am = Mat::Identity(3, 3), bm = Mat::Identity(2, 2);
    for (int m = 1; m <= 4; ++m) {
      am = Mat(am * a);
      bm = Mat(bm * b);
      family.push_back(powers_sum(CPMap::ad(am), CPMap::ad(bm), am, bm));
    }
    CpReport rep = cp_checks(family, cfg.tol_identity);
    cl.defect("powers.ad-choi", "block-sum-positivity", -rep.choi_min_eigenvalue, 1e-10);
    cl.defect("powers.ad-unitality", "block-sum-unitality", rep.unitality_defect, 1e-10);
    cl.defect("powers.ad-semigroup", "block-sum-semigroup", rep.semigroup_defect, 1e-10);

    Mat block = Mat::Zero(5, 5);
    block.topLeftCorner(3, 3) = a;
    block.bottomRightCorner(2, 2) = b;
    cl.defect("powers.ad-block-form", "block-sum-identity",
              CPMap::distance(family[0], CPMap::ad(block)), 1e-12);
    cl.defect("powers.canonical-intertwining", "intertwining-relation",
              intertwining_defect(CPMap::ad(a), a), 1e-12);
  }

  {
    // one violated step against the canonical two-step map
    Mat vbad = rng.unitary(2);
    CPMap tau1 = powers_sum(CPMap::ad(a), CPMap::ad(b), a, vbad);
    CPMap tau2 = powers_sum(CPMap::ad(Mat(a * a)), CPMap::ad(Mat(b * b)), Mat(a * a), Mat(b * b));
    double defect = CPMap::distance(tau1.compose(tau1), tau2);
    cl.flag("powers.fault-detected", "intertwining-relation",
            defect > 1e-3 && intertwining_defect(CPMap::ad(b), vbad) > 1e-3);
  }

  {
    Mat iso = Mat::Zero(3, 2);
    iso(0, 0) = 1.0;
    iso(1, 1) = 1.0;
    CPMap phi = CPMap::ad(iso);
    cl.flag("powers.isometry-nonunital", "block-sum-unitality", phi.unitality_defect() > 1e-6);
    cl.defect("powers.isometry-cp", "block-sum-positivity", -phi.choi_min_eigenvalue(), 1e-10);
  }
}

// ---------------------------------------------------------------------------
// cluster
// ---------------------------------------------------------------------------

void suite_cluster(const SuiteConfig& cfg, CheckList& cl) {
  GridCcr ccr = ccr_build(cfg.k, cfg.level, cfg.slice_cap);
  VectorFamily vac = ccr_vacuum(ccr);
  SubsystemFamily line = unit_line_family(ccr.sys, vac.values);
  int q = 1 << (cfg.level - cfg.coarse_level);

  cl.equals("cluster.split-empty-at-cell", "no-interior-split",
            static_cast<double>(split_pair_span(ccr.sys, line, 1).rank()), 0.0);

  if (q >= 2) {
    Subspace two = split_pair_span(ccr.sys, line, 2);
    cl.equals("cluster.split-two-cells", "split-pair-span",
              static_cast<double>(two.rank()), static_cast<double>(cfg.k) * cfg.k);
  }

  {
    // brute-force oracle: configurations with at least two occupied cells
    double expect = 0.0;
    for (int n = 2; n <= q; ++n) {
      double binom = 1.0;
      for (int i = 0; i < n; ++i) binom = binom * (q - i) / (i + 1);
      expect += binom * std::pow(static_cast<double>(cfg.k), n);
    }
    Subspace block = split_pair_span(ccr.sys, line, q);
    cl.equals("cluster.split-block-count", "split-pair-span",
              static_cast<double>(block.rank()), expect);
  }

  ClusterResult cr = cluster(ccr.sys, line, cfg.coarse_level, cfg.tol_identity);
  cl.equals("cluster.prime-shape", "at-most-one-excitation",
            static_cast<double>(cr.f_prime_block.back().rank()), 1.0 + q * cfg.k);

  {
    double def22 = 0.0;
    for (int i = 1; i < q; ++i)
      for (int j = 1; i + j <= q; ++j) {
        Mat image = ccr.sys.beta(i, j).apply_cols(
            cr.f_prime_block[static_cast<std::size_t>(i + j - 1)].basis);
        Subspace target = tensor_subspace(cr.f_prime_block[static_cast<std::size_t>(i - 1)],
                                          cr.f_prime_block[static_cast<std::size_t>(j - 1)]);
        def22 = std::max(def22, containment_defect(Subspace{image.rows(), image}, target));
      }
    cl.defect("cluster.prime-inclusion-law", "split-complement-inclusion-system", def22, 1e-10);
  }

  {
    double contains = 0.0;
    for (int m = 1; m <= cr.f_check.cells(); ++m) {
      Vec um = vac.at(m * q);
      Mat col(um.size(), 1);
      col.col(0) = um;
      contains = std::max(contains,
                          containment_defect(Subspace{um.size(), col}, cr.f_check.at(m)));
    }
    cl.defect("cluster.contains-seed", "cluster-sandwich", contains, 1e-10);
    cl.defect("cluster.is-subsystem", "cluster-sandwich", subsystem_defect(cr.f_check), 1e-10);
  }

  {
    RootSpace roots = root_space(ccr.sys, vac, cfg.tol_identity);
    SubsystemFamily w = unit_root_family(ccr.sys, vac, roots);
    SubsystemFamily gen = generated_at_level(ccr.sys, w, cfg.coarse_level,
                                             std::max(cfg.tol_identity, 1e-9));
    double dist = 0.0;
    for (int m = 1; m <= cr.f_check.cells(); ++m)
      dist = std::max(dist, projector_distance(cr.f_check.at(m), gen.at(m)));
    cl.defect("cluster.type-one-agreement", "cluster-of-unit-is-type-one", dist, 1e-10);
  }

  {
    SubsystemFamily regen = generated_at_level(ccr.sys, cr.f_check, cfg.coarse_level,
                                               std::max(cfg.tol_identity, 1e-9));
    double dist = 0.0;
    for (int m = 1; m <= cr.f_check.cells(); ++m)
      dist = std::max(dist, projector_distance(cr.f_check.at(m), regen.at(m)));
    cl.defect("cluster.idempotent", "cluster-closure", dist, 1e-10);
  }

  {
    XSpaceReport x = x_space_checks(ccr.sys, vac, cfg.coarse_level, cfg.tol_identity);
    cl.defect("cluster.x-padding-containment", "unit-padding-containment", x.padding_containment,
              1e-10);
    cl.equals("cluster.x-cell-dim", "excitation-space-dimension",
              static_cast<double>(x.dim_x_cell), static_cast<double>(q * cfg.k));
    if (x.dim_x_two_cells > 0) {
      cl.equals("cluster.x-two-cell-dim", "excitation-space-dimension",
                static_cast<double>(x.dim_x_two_cells), 2.0 * q * cfg.k);
      cl.defect("cluster.x-direct-sum", "excitation-space-splitting", x.direct_sum_defect, 1e-10);
      cl.defect("cluster.x-orthogonality", "excitation-space-splitting",
                x.summand_orthogonality, 1e-12);
      cl.defect("cluster.x-shift-isometry", "shift-semigroup-isometry",
                x.shift_isometry_defect, 1e-12);
    }
    if (x.last_window_dim >= 0) {
      cl.flag("cluster.x-purity-decay", "shift-pure-no-unitary-part", x.purity_decay);
    }
  }

  {
    Subspace same = mixed_pair_complement(ccr.sys, line, line, q);
    cl.defect("cluster.two-subsystem-same", "two-subsystem-complement",
              projector_distance(same, cr.f_prime_block.back()), 1e-12);
    SubsystemFamily full = full_family(ccr.sys);
    Subspace with_full = mixed_pair_complement(ccr.sys, full, line, q);
    cl.equals("cluster.two-subsystem-full", "two-subsystem-complement",
              static_cast<double>(with_full.rank()), static_cast<double>(ccr.sys.dim(q)));

    Vec g = Vec::Zero(ccr.cell_dim());
    g[0] = std::sqrt(0.5);
    g[1] = std::sqrt(0.5);
    VectorFamily other = unit_from_cell(ccr.sys, g);
    SubsystemFamily line2 = unit_line_family(ccr.sys, other.values);
    Subspace mixed = mixed_pair_complement(ccr.sys, line, line2, q);
    double contain = 0.0;
    for (const SubsystemFamily* fam : {&line, &line2}) {
      Mat col(ccr.sys.dim(q), 1);
      col.col(0) = fam->at(q).basis.col(0);
      contain = std::max(contain, containment_defect(Subspace{col.rows(), col}, mixed));
    }
    cl.defect("cluster.two-subsystem-contains", "two-subsystem-complement", contain, 1e-10);
  }
}

// ---------------------------------------------------------------------------
// randomset
// ---------------------------------------------------------------------------

void suite_randomset(const SuiteConfig& cfg, CheckList& cl) {
  GridCcr ccr = ccr_build(cfg.k, cfg.level, cfg.slice_cap);
  if (ccr.sys.dim(ccr.sys.cells()) > kExactDistributionDimCap)
    raise(Errc::SizeLimit, "exact distributions need a smaller top slice");
  VectorFamily vac = ccr_vacuum(ccr);
  SubsystemFamily line = unit_line_family(ccr.sys, vac.values);
  int m = ccr.sys.cells();
  Eigen::Index top = ccr.sys.dim(m);

  FaithfulState eta = cfg.state == "diag" ? diagonal_state(top, cfg.seed) : tracial_state(top);
  RandomSetDistribution dist = random_set_distribution(ccr.sys, line, eta, cfg.tol_identity);

  cl.defect("randomset.sum-one", "avoidance-measure", std::abs(dist.sum() - 1.0), 1e-10);
  cl.defect("randomset.nonnegative", "avoidance-measure", std::max(0.0, -dist.min()), 1e-12);

  {
    RandomSetDistribution trac =
        cfg.state == "diag" ? random_set_distribution(ccr.sys, line, tracial_state(top)) : dist;
    // tracial state: cells occupied independently with probability k/(k+1)
    double p_vac = 1.0 / (1.0 + cfg.k);
    double worst = 0.0;
    for (std::uint32_t a = 0; a < trac.probs.size(); ++a) {
      int occ = __builtin_popcount(a);
      double expect = std::pow(1.0 - p_vac, occ) * std::pow(p_vac, m - occ);
      worst = std::max(worst, std::abs(trac.probs[a] - expect));
    }
    cl.defect("randomset.iid-cells", "tracial-cell-independence", worst, 1e-12);
  }

  {
    SubsystemFamily full = full_family(ccr.sys);
    RandomSetDistribution point = random_set_distribution(ccr.sys, full, eta);
    double worst = std::abs(point.probs[0] - 1.0);
    for (std::uint32_t a = 1; a < point.probs.size(); ++a)
      worst = std::max(worst, std::abs(point.probs[a]));
    cl.defect("randomset.full-point-mass", "avoidance-measure", worst, 1e-10);
  }

  {
    double violation = 0.0;
    for (std::uint32_t b = 0; b < (1u << m); ++b) {
      std::uint32_t bigger = b | (1u << (b % m));
      violation = std::max(violation, dist.avoid(bigger) - dist.avoid(b));
    }
    cl.defect("randomset.avoid-monotone", "avoidance-monotonicity", violation, 1e-12);
  }

  {
    int q = 1 << (cfg.level - cfg.coarse_level);
    double worst = 0.0;
    for (int s = 0; s < (1 << cfg.coarse_level); ++s)
      for (int t = s + 1; t <= (1 << cfg.coarse_level); ++t) {
        AtMostOneReport rep =
            at_most_one_check(ccr.sys, line, dist, eta, s * q, t * q, cfg.tol_identity);
        worst = std::max(worst, rep.difference);
      }
    cl.defect("randomset.at-most-one", "at-most-one-projection", worst, 1e-9);

    if (cfg.state != "diag") {
      // binomial oracle for the tracial state over the first coarse cell
      AtMostOneReport rep = at_most_one_check(ccr.sys, line, dist, eta, 0, q, cfg.tol_identity);
      double p_vac = 1.0 / (1.0 + cfg.k);
      double expect = std::pow(p_vac, q) + q * (1.0 - p_vac) * std::pow(p_vac, q - 1);
      cl.defect("randomset.at-most-one-analytic", "at-most-one-projection",
                std::abs(rep.measure_side - expect), 1e-12);
    }
  }

  {
    PushforwardReport rep =
        cluster_pushforward_check(ccr.sys, line, eta, cfg.coarse_level, cfg.tol_identity);
    cl.defect("randomset.pushforward-intervals", "cluster-pushforward",
              rep.max_interval_difference, 1e-9);
    cl.defect("randomset.pushforward-tv", "cluster-pushforward", rep.total_variation, 1e-9);
    cl.defect("randomset.pushforward-factorization", "cluster-projection-factorization",
              rep.factorization_defect, 1e-10);
  }

  {
    // zero patterns agree across faithful states
    FaithfulState eta2 = diagonal_state(top, cfg.seed + 101);
    SubsystemFamily full = full_family(ccr.sys);
    bool same = true;
    for (const SubsystemFamily* fam : {&line, &full}) {
      RandomSetDistribution d1 = random_set_distribution(ccr.sys, *fam, eta);
      RandomSetDistribution d2 = random_set_distribution(ccr.sys, *fam, eta2);
      for (std::uint32_t a = 0; a < d1.probs.size(); ++a)
        if ((std::abs(d1.probs[a]) <= 1e-12) != (std::abs(d2.probs[a]) <= 1e-12)) same = false;
    }
    cl.flag("randomset.null-pattern-invariance", "measure-type-null-sets", same);
  }

  {
    // the per-cell factorization agrees with literal interval products
    GridCcr tiny = ccr_build(1, 2, cfg.slice_cap);
    VectorFamily tvac = ccr_vacuum(tiny);
    SubsystemFamily tline = unit_line_family(tiny.sys, tvac.values);
    GridSystem dense = densified(tiny.sys);
    SubsystemFamily dline;
    dline.parent = &dense;
    dline.level = tline.level;
    dline.spaces = tline.spaces;
    FaithfulState teta = diagonal_state(tiny.sys.dim(4), cfg.seed + 7);
    RandomSetDistribution fast = random_set_distribution(tiny.sys, tline, teta);
    RandomSetDistribution slow = random_set_distribution(dense, dline, teta);
    double worst = 0.0;
    for (std::uint32_t a = 0; a < fast.probs.size(); ++a)
      worst = std::max(worst, std::abs(fast.probs[a] - slow.probs[a]));
    cl.defect("randomset.dual-path-agreement", "avoidance-measure", worst, 1e-12);
  }

  {
    // an inclusion-only family violates the interval factorization
    GridCcr tiny = ccr_build(1, 2, cfg.slice_cap);
    SubsystemFamily lowpass;
    lowpass.parent = &tiny.sys;
    lowpass.level = tiny.sys.level();
    for (int mm = 1; mm <= tiny.sys.cells(); ++mm) {
      std::vector<Vec> cols;
      for (Eigen::Index flat = 0; flat < tiny.sys.dim(mm); ++flat) {
        CcrBasisElement el = ccr_decode(tiny, mm, flat);
        if (static_cast<int>(el.values.size()) <= 1) {
          Vec bvec = Vec::Zero(tiny.sys.dim(mm));
          bvec[flat] = 1.0;
          cols.push_back(bvec);
        }
      }
      lowpass.spaces.push_back(orthonormalize(cols, tiny.sys.dim(mm)));
    }
    Mat p01 = interval_projection(tiny.sys, lowpass, 0, 2);
    Mat p12 = interval_projection(tiny.sys, lowpass, 2, 4);
    Mat p02 = interval_projection(tiny.sys, lowpass, 0, 4);
    double violation = operator_norm(Mat(p01 * p12) - p02);
    cl.flag("randomset.non-product-detected", "interval-projection-factorization",
            violation > 0.1);
  }
}

using SuiteFn = void (*)(const SuiteConfig&, CheckList&);

const std::map<std::string, SuiteFn>& suite_table() {
  static const std::map<std::string, SuiteFn> table = {
      {"system-checks", suite_system_checks},
      {"units", suite_units},
      {"ccr-roots", suite_ccr_roots},
      {"amalgam-spatial", suite_amalgam_spatial},
      {"amalgam-partial", suite_amalgam_partial},
      {"powers", suite_powers},
      {"cluster", suite_cluster},
      {"randomset", suite_randomset},
  };
  return table;
}

}  // namespace

void SuiteConfig::validate() const {
  if (k < 1) raise(Errc::BadInput, "k must be at least 1");
  if (level < 1) raise(Errc::BadInput, "level must be at least 1");
  if (coarse_level < 0 || coarse_level >= level)
    raise(Errc::BadInput, "coarse level must satisfy 0 <= coarse < level");
  if (tol_identity <= 0 || tol_spectral <= 0) raise(Errc::BadInput, "tolerances must be positive");
  if (state != "tracial" && state != "diag") raise(Errc::BadInput, "state is tracial or diag");
  if (slice_cap < 2) raise(Errc::BadInput, "slice cap too small");
}

bool Report::passed() const {
  for (const Check& c : checks)
    if (!c.passed) return false;
  return true;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "system-checks", "units",  "ccr-roots", "amalgam-spatial",
      "amalgam-partial", "powers", "cluster",   "randomset",
      "all"};
  return names;
}

Report run_suite(const SuiteConfig& cfg_in) {
  SuiteConfig cfg = cfg_in;
  if (const char* cap = std::getenv("PRODSYS_SLICE_CAP")) cfg.slice_cap = std::atoll(cap);
  cfg.validate();

  Report rep;
  rep.suite = cfg.suite;
  rep.config = cfg;
  CheckList cl{&rep.checks};

  auto start = std::chrono::steady_clock::now();
  if (cfg.suite == "all") {
    for (const auto& [name, fn] : suite_table()) {
      (void)name;
      fn(cfg, cl);
    }
  } else {
    auto it = suite_table().find(cfg.suite);
    if (it == suite_table().end()) raise(Errc::UnknownSuite, "no suite named " + cfg.suite);
    it->second(cfg, cl);
  }
  std::sort(rep.checks.begin(), rep.checks.end(),
            [](const Check& a, const Check& b) { return a.name < b.name; });
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

nlohmann::json config_to_json(const SuiteConfig& cfg) {
  return nlohmann::json{{"suite", cfg.suite},
                        {"k", cfg.k},
                        {"level", cfg.level},
                        {"coarse_level", cfg.coarse_level},
                        {"tol_identity", cfg.tol_identity},
                        {"tol_spectral", cfg.tol_spectral},
                        {"state", cfg.state},
                        {"seed", cfg.seed},
                        {"slice_cap", cfg.slice_cap}};
}

SuiteConfig config_from_json(const nlohmann::json& j) {
  SuiteConfig cfg;
  if (j.contains("suite")) cfg.suite = j.at("suite").get<std::string>();
  if (j.contains("k")) cfg.k = j.at("k").get<int>();
  if (j.contains("level")) cfg.level = j.at("level").get<int>();
  if (j.contains("coarse_level")) cfg.coarse_level = j.at("coarse_level").get<int>();
  if (j.contains("tol_identity")) cfg.tol_identity = j.at("tol_identity").get<double>();
  if (j.contains("tol_spectral")) cfg.tol_spectral = j.at("tol_spectral").get<double>();
  if (j.contains("state")) cfg.state = j.at("state").get<std::string>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("slice_cap")) cfg.slice_cap = j.at("slice_cap").get<Eigen::Index>();
  return cfg;
}

nlohmann::json report_to_json(const Report& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const Check& c : r.checks)
    checks.push_back(nlohmann::json{{"name", c.name},
                                    {"ref", c.ref},
                                    {"passed", c.passed},
                                    {"measured", c.measured},
                                    {"tolerance", c.tolerance}});
  return nlohmann::json{{"suite", r.suite},
                        {"config", config_to_json(r.config)},
                        {"checks", checks},
                        {"passed", r.passed()},
                        {"wall_time_s", r.wall_time_s}};
}

nlohmann::json dump_object(const nlohmann::json& request) {
  std::string object = request.at("object").get<std::string>();
  int k = request.value("k", 1);
  int level = request.value("level", 2);
  Eigen::Index cap = request.value("slice_cap", kDefaultSliceCap);

  if (object == "ccr-system") return ccr_build(k, level, cap).sys.to_json();
  if (object == "truncated-system") {
    int n = request.value("max_particles", 1);
    return ccr_truncate(ccr_build(k, level, cap), n).to_json();
  }
  if (object == "vacuum-family") {
    GridCcr ccr = ccr_build(k, level, cap);
    return family_to_json(ccr_vacuum(ccr));
  }
  if (object == "vacuum-root-family") {
    GridCcr ccr = ccr_build(k, level, cap);
    Vec c = Vec::Zero(k);
    c[request.value("component", 0)] = 1.0;
    AdditiveFamily a = vacuum_root(ccr, c);
    VectorFamily values;
    values.sys = &ccr.sys;
    values.values = a.values;
    return family_to_json(values);
  }
  if (object == "distribution") {
    GridCcr ccr = ccr_build(k, level, cap);
    if (ccr.sys.dim(ccr.sys.cells()) > kExactDistributionDimCap)
      raise(Errc::SizeLimit, "exact distributions need a smaller top slice");
    VectorFamily vac = ccr_vacuum(ccr);
    SubsystemFamily line = unit_line_family(ccr.sys, vac.values);
    Eigen::Index top = ccr.sys.dim(ccr.sys.cells());
    FaithfulState eta = request.value("state", std::string("tracial")) == "diag"
                            ? diagonal_state(top, request.value("seed", std::uint64_t(1)))
                            : tracial_state(top);
    RandomSetDistribution dist = random_set_distribution(ccr.sys, line, eta);
    return nlohmann::json{{"cells", dist.cells}, {"probs", dist.probs}};
  }
  if (object == "report") {
    SuiteConfig cfg = config_from_json(request.value("config", nlohmann::json::object()));
    return report_to_json(run_suite(cfg));
  }
  raise(Errc::BadInput, "unknown dump object " + object);
}

}  // namespace prodsys

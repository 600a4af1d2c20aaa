#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "prodsys/ccr.hpp"
#include "prodsys/system.hpp"

using namespace prodsys;

namespace {

DyadicPartition parts(std::initializer_list<std::pair<int, int>> items) {
  DyadicPartition p;
  for (auto [num, lvl] : items) p.durations.emplace_back(num, lvl);
  return p;
}

BetaOp random_perm_op(Rng& rng, Eigen::Index n) {
  std::vector<Eigen::Index> src(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) src[static_cast<std::size_t>(i)] = i;
  for (Eigen::Index i = n - 1; i > 0; --i) {
    auto j = static_cast<Eigen::Index>(std::abs(rng.real()) * (i + 1)) % (i + 1);
    std::swap(src[static_cast<std::size_t>(i)], src[static_cast<std::size_t>(j)]);
  }
  return BetaOp::perm(std::move(src));
}

}  // namespace

TEST_CASE("structured operators agree with their dense forms") {
  Rng rng(31);
  BetaOp p = random_perm_op(rng, 6);
  BetaOp q = random_perm_op(rng, 6);
  Mat pd = p.dense_matrix(), qd = q.dense_matrix();

  CHECK(operator_norm(p.compose(q).dense_matrix() - pd * qd) == 0.0);
  CHECK(operator_norm(p.tensor(q).dense_matrix() - tensor_op(pd, qd)) == 0.0);
  CHECK(operator_norm(p.adjoint().dense_matrix() - pd.adjoint()) == 0.0);

  Vec v = rng.vector(6);
  CHECK((p.apply(v) - pd * v).norm() == 0.0);
  CHECK((p.apply_adjoint(v) - pd.adjoint() * v).norm() == 0.0);

  Mat d = rng.matrix(6, 6);
  BetaOp dd = BetaOp::dense(d);
  CHECK(operator_norm(p.compose(dd).dense_matrix() - pd * d) < 1e-14);
  CHECK(operator_norm(dd.compose(p).dense_matrix() - d * pd) < 1e-14);

  CHECK(std::abs(BetaOp::distance(p, q) - operator_norm(pd - qd)) < 1e-12);
  CHECK(BetaOp::distance(p, p) == 0.0);
  CHECK(p.isometry_defect() == 0.0);
  CHECK(p.is_square_unitary(1e-12));
}

TEST_CASE("grid ccr is an exact product system") {
  GridCcr ccr = ccr_build(1, 2);
  StructureReport rep = check_system(ccr.sys);
  CHECK(rep.isometry_defect == 0.0);
  CHECK(rep.coassociativity_defect == 0.0);
  CHECK(rep.surjective);
  CHECK(rep.passed);
  for (int m = 1; m <= 4; ++m) CHECK(ccr.sys.dim(m) == (1 << m));
}

TEST_CASE("truncation is a proper inclusion system") {
  GridCcr ccr = ccr_build(1, 2);
  GridSystem trunc = ccr_truncate(ccr, 1);
  for (int m = 1; m <= 4; ++m) CHECK(trunc.dim(m) == m + 1);
  StructureReport rep = check_system(trunc);
  CHECK(rep.isometry_defect < 1e-12);
  CHECK(rep.coassociativity_defect < 1e-12);
  CHECK(!rep.surjective);
  CHECK(rep.passed);

  // corrupting one entry is detected
  std::vector<Eigen::Index> dims;
  for (int m = 1; m <= 4; ++m) dims.push_back(trunc.dim(m));
  std::map<std::pair<int, int>, BetaOp> betas;
  for (int i = 1; i < 4; ++i)
    for (int j = 1; i + j <= 4; ++j) {
      Mat b = trunc.beta(i, j).dense_matrix();
      if (i == 2 && j == 1) b(1, 1) += 1e-3;
      betas[{i, j}] = BetaOp::dense(std::move(b));
    }
  GridSystem bad =
      GridSystem::stored(2, std::move(dims), std::move(betas), SystemKind::Inclusion);
  StructureReport brep = check_system(bad);
  CHECK(!brep.passed);
}

TEST_CASE("composite connecting maps") {
  GridCcr ccr = ccr_build(1, 3);
  GridSystem trunc = ccr_truncate(ccr, 1);

  DyadicPartition whole = parts({{1, 0}});
  CHECK(BetaOp::distance(beta_composite(trunc, whole, whole),
                         BetaOp::identity(trunc.dim(8))) == 0.0);

  DyadicPartition halves = parts({{1, 1}, {1, 1}});
  CHECK(BetaOp::distance(beta_composite(trunc, whole, halves), trunc.beta(4, 4)) == 0.0);

  // chain law along a refinement chain
  DyadicPartition mid = parts({{1, 1}, {1, 2}, {1, 2}});
  DyadicPartition fine = finest(DyadicTime(1, 0), 3);
  BetaOp direct = beta_composite(trunc, whole, fine);
  BetaOp chained = beta_composite(trunc, mid, fine)
                       .compose(beta_composite(trunc, halves, mid))
                       .compose(beta_composite(trunc, whole, halves));
  CHECK(BetaOp::distance(direct, chained) < 1e-12);

  CHECK_THROWS_AS(beta_composite(trunc, halves, parts({{1, 2}, {1, 1}, {1, 2}})), Error);
}

TEST_CASE("inductive limits") {
  GridCcr ccr = ccr_build(1, 2);

  // a product system is its own limit up to reindexing
  InductiveLimit self = inductive_limit(ccr.sys);
  CHECK(BetaOp::distance(self.inject(finest(DyadicTime(1, 0), 2)),
                         BetaOp::identity(ccr.sys.dim(4))) == 0.0);
  for (int m = 1; m <= 4; ++m) CHECK(self.prod.dim(m) == ccr.sys.dim(m));

  GridSystem trunc = ccr_truncate(ccr, 1);
  InductiveLimit lim = inductive_limit(trunc);
  CHECK(lim.prod.dim(4) == 16);
  CHECK(lim.prod.kind() == SystemKind::Product);

  // injections are isometries consistent with refinement
  auto pool = all_partitions(DyadicTime(1, 0), 2);
  for (const auto& coarse : pool) {
    CHECK(lim.inject(coarse).isometry_defect() < 1e-12);
    for (const auto& fine : pool) {
      auto w = refines(coarse, fine);
      if (!w) continue;
      BetaOp lhs = lim.inject(fine).compose(beta_composite(trunc, coarse, fine));
      CHECK(BetaOp::distance(lhs, lim.inject(coarse)) < 1e-12);
    }
  }
}

TEST_CASE("generated subsystems") {
  GridCcr ccr = ccr_build(1, 2);
  SubsystemFamily full = full_family(ccr.sys);
  SubsystemFamily gen = generated_subsystem(ccr.sys, full);
  for (int m = 1; m <= 4; ++m) CHECK(gen.at(m).rank() == ccr.sys.dim(m));

  VectorFamily vac = ccr_vacuum(ccr);
  SubsystemFamily line = unit_line_family(ccr.sys, vac.values);
  SubsystemFamily gline = generated_subsystem(ccr.sys, line);
  for (int m = 1; m <= 4; ++m) {
    CHECK(gline.at(m).rank() == 1);
    CHECK(projector_distance(gline.at(m), line.at(m)) < 1e-12);
  }

  // unit plus roots generate the whole flow
  RootSpace rs = root_space(ccr.sys, vac);
  SubsystemFamily seed = unit_root_family(ccr.sys, vac, rs);
  SubsystemFamily gtype = generated_subsystem(ccr.sys, seed);
  for (int m = 1; m <= 4; ++m) CHECK(gtype.at(m).rank() == (1 << m));

  // a family violating the inclusion law is rejected
  SubsystemFamily badseed = line;
  badseed.spaces[1] = Subspace{4, Mat(ccr.sys.dim(2), 1)};
  Vec odd = Vec::Zero(4);
  odd[1] = 1.0;
  badseed.spaces[1].basis.col(0) = odd;
  CHECK_THROWS_AS(generated_subsystem(ccr.sys, badseed), Error);
}

TEST_CASE("tensor products of systems") {
  GridCcr e = ccr_build(1, 2);
  GridCcr f = ccr_build(2, 2);
  GridSystem prod = tensor_systems(e.sys, f.sys);
  StructureReport rep = check_system(prod);
  CHECK(rep.passed);
  CHECK(rep.surjective);
  for (int m = 1; m <= 4; ++m) CHECK(prod.dim(m) == e.sys.dim(m) * f.sys.dim(m));

  GridSystem trivial = GridSystem::pure_tensor(2, 1, SystemKind::Product);
  GridSystem same = tensor_systems(e.sys, trivial);
  for (int m = 1; m <= 4; ++m) CHECK(same.dim(m) == e.sys.dim(m));
  CHECK(check_system(same).passed);

  CHECK_THROWS_AS(tensor_systems(e.sys, ccr_build(1, 1).sys), Error);
}

TEST_CASE("flip unitaries") {
  GridCcr ccr = ccr_build(1, 2);
  DyadicTime big(1, 0);

  BetaOp u = flip_unitary(ccr.sys, big, DyadicTime(1, 1));
  CHECK(u.isometry_defect() == 0.0);
  CHECK(BetaOp::distance(u.compose(u), BetaOp::identity(16)) == 0.0);

  // the flip moves a prefixed observable behind the unit: on the vacuum the
  // configuration just translates across the split
  BetaOp u2 = flip_unitary(ccr.sys, big, DyadicTime(1, 2));
  VectorFamily vac = ccr_vacuum(ccr);
  Vec y = Vec::Zero(ccr.sys.dim(3));
  CcrBasisElement el;
  el.occupied = 0b001u;  // one particle in the earliest cell of [0, 3/4]
  el.values = {0};
  y[ccr_encode(ccr, 3, el)] = 1.0;
  Vec in = ccr.sys.beta(3, 1).apply_adjoint(tensor(y, vac.at(1)));
  Vec out = u2.apply(in);
  CcrBasisElement shifted;
  shifted.occupied = 0b0010u;  // pushed one cell to the right of the new unit prefix
  shifted.values = {0};
  Vec expected = Vec::Zero(16);
  expected[ccr_encode(ccr, 4, shifted)] = 1.0;
  CHECK((out - expected).norm() < 1e-12);

  CHECK_THROWS_AS(flip_unitary(ccr.sys, big, big), Error);
}

TEST_CASE("morphism checks") {
  GridCcr e = ccr_build(1, 2);
  GridCcr f = ccr_build(2, 2);

  // second-quantized embedding of the value spaces intertwines exactly
  Mat cell = Mat::Zero(3, 2);
  cell(0, 0) = 1.0;
  cell(1, 1) = 1.0;
  std::vector<Mat> maps;
  Mat power = cell;
  for (int m = 1; m <= 4; ++m) {
    maps.push_back(power);
    if (m < 4) power = tensor_op(power, cell);
  }
  Morphism good{&e.sys, &f.sys, maps, true};
  MorphismReport rep = check_morphism(good);
  CHECK(rep.intertwining_defect < 1e-12);
  CHECK(rep.contractive_ok);
  CHECK(rep.passed);

  Rng rng(37);
  std::vector<Mat> junk;
  for (int m = 1; m <= 4; ++m) junk.push_back(0.5 * rng.matrix(f.sys.dim(m), e.sys.dim(m)));
  Morphism bad{&e.sys, &f.sys, junk, true};
  CHECK(!check_morphism(bad).passed);
}

TEST_CASE("system serialization round trips") {
  GridCcr ccr = ccr_build(1, 2);
  GridSystem trunc = ccr_truncate(ccr, 1);
  nlohmann::json j = trunc.to_json();
  GridSystem back = GridSystem::from_json(j);
  CHECK(back.level() == trunc.level());
  for (int m = 1; m <= 4; ++m) CHECK(back.dim(m) == trunc.dim(m));
  for (int i = 1; i < 4; ++i)
    for (int jj = 1; i + jj <= 4; ++jj)
      CHECK(BetaOp::distance(back.beta(i, jj), trunc.beta(i, jj)) == 0.0);
  CHECK(back.to_json().dump() == j.dump());
}

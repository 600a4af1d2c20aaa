#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "prodsys/ccr.hpp"

using namespace prodsys;

TEST_CASE("slice dimensions and caps") {
  GridCcr ccr = ccr_build(1, 2);
  for (int m = 1; m <= 4; ++m) CHECK(ccr.sys.dim(m) == (1 << m));
  GridCcr wide = ccr_build(2, 2);
  for (int m = 1; m <= 4; ++m) {
    Eigen::Index d = 1;
    for (int i = 0; i < m; ++i) d *= 3;
    CHECK(wide.sys.dim(m) == d);
  }
  CHECK_THROWS_AS(ccr_build(1, 13), Error);          // 2^8192 cells blow the cap
  CHECK_THROWS_AS(ccr_build(3, 3, 4096), Error);     // 4^8 = 65536 > cap
  CHECK_NOTHROW(ccr_build(3, 3, 1 << 17));
}

TEST_CASE("configuration encoding round trips") {
  GridCcr ccr = ccr_build(2, 2);
  for (int m = 1; m <= 4; ++m)
    for (Eigen::Index flat = 0; flat < ccr.sys.dim(m); ++flat) {
      CcrBasisElement el = ccr_decode(ccr, m, flat);
      CHECK(ccr_encode(ccr, m, el) == flat);
      CHECK(static_cast<int>(el.values.size()) == __builtin_popcount(el.occupied));
    }
}

TEST_CASE("the vacuum is an exact normalized unit") {
  GridCcr ccr = ccr_build(2, 2);
  VectorFamily vac = ccr_vacuum(ccr);
  UnitReport rep = check_unit(vac);
  CHECK(rep.factorization_defect == 0.0);
  CHECK(rep.normalized);
  for (int m = 1; m <= 4; ++m) CHECK(std::abs(vac.at(m).norm() - 1.0) == 0.0);

  // orthogonal to every one-particle basis vector
  for (int cell = 0; cell < 4; ++cell)
    for (int v = 0; v < 2; ++v) {
      CcrBasisElement el;
      el.occupied = 1u << cell;
      el.values = {v};
      CHECK(std::abs(vac.at(4)[ccr_encode(ccr, 4, el)]) == 0.0);
    }
}

TEST_CASE("exponential vectors") {
  GridCcr ccr = ccr_build(1, 3);
  StepFunction zero;
  for (int c = 0; c < 8; ++c) zero.cell_values.push_back(Vec::Zero(1));
  CHECK((exp_vector(ccr, zero, 8) - ccr_vacuum(ccr).top()).norm() == 0.0);

  Rng rng(47);
  StepFunction f, g;
  for (int c = 0; c < 8; ++c) {
    f.cell_values.push_back(rng.vector(1));
    g.cell_values.push_back(rng.vector(1));
  }
  Cplx direct = exp_vector(ccr, f, 8).dot(exp_vector(ccr, g, 8));
  Cplx formula(1, 0);
  for (int c = 0; c < 8; ++c)
    formula *= Cplx(1, 0) + ccr.delta() * f.at_cell(c).dot(g.at_cell(c));
  CHECK(std::abs(direct - formula) < 1e-13);

  // constant density approximates the continuum gram within O(delta)
  StepFunction one;
  for (int c = 0; c < 8; ++c) one.cell_values.push_back(Vec::Ones(1));
  double val = exp_vector(ccr, one, 8).dot(exp_vector(ccr, one, 8)).real();
  CHECK(std::abs(val - std::exp(1.0)) < 2.0 * ccr.delta() * std::exp(1.0));

  // splitting matches the connecting map
  Vec whole = exp_vector(ccr, f, 8);
  StepFunction tail;
  for (int c = 5; c < 8; ++c) tail.cell_values.push_back(f.at_cell(c));
  Vec split = tensor(exp_vector(ccr, f, 5), exp_vector(ccr, tail, 3));
  CHECK((ccr.sys.beta(5, 3).apply(whole) - split).norm() < 1e-13);
}

TEST_CASE("vacuum roots") {
  GridCcr ccr = ccr_build(2, 2);
  Vec zero = Vec::Zero(2);
  AdditiveFamily z = vacuum_root(ccr, zero);
  for (int m = 1; m <= 4; ++m) CHECK(z.at(m).norm() == 0.0);

  Rng rng(53);
  Vec c = rng.vector(2);
  AdditiveFamily a = vacuum_root(ccr, c);
  CHECK(std::abs(a.top().squaredNorm() - c.squaredNorm()) < 1e-13);
  for (int m = 1; m <= 4; ++m)
    CHECK(std::abs(a.at(m).squaredNorm() - ccr.sys.time(m).value() * c.squaredNorm()) < 1e-13);

  RootSpace rs = solve_vacuum_roots(ccr);
  CHECK(rs.dimension() == 2);
  RootSpace rs3 = solve_vacuum_roots(ccr_build(3, 2, 1 << 17));
  CHECK(rs3.dimension() == 3);
  RootSpace rs1 = solve_vacuum_roots(ccr_build(1, 2));
  CHECK(rs1.dimension() == 1);
  for (int k : {1, 2, 3})
    for (int level : {1, 2}) CHECK(index_of(ccr_build(k, level, 1 << 17).sys) == k);
  // proportional to the constant-density root
  GridCcr one = ccr_build(1, 2);
  Vec c1(1);
  c1[0] = 1.0;
  Vec chi = vacuum_root(one, c1).at(1);
  Vec solver = root_family(rs1, 0).at(1);
  CHECK(std::abs(std::abs(chi.normalized().dot(solver.normalized())) - 1.0) < 1e-12);
}

TEST_CASE("shifts on the one-particle sector") {
  GridCcr ccr = ccr_build(2, 3, 1 << 17);
  Mat s0 = shift(ccr, 0, 8);
  CHECK(operator_norm(s0 - Mat::Identity(16, 16)) == 0.0);

  Mat s1 = shift(ccr, 1, 8);
  Mat s2 = shift(ccr, 2, 7);
  Mat s3 = shift(ccr, 3, 8);
  CHECK(operator_norm(s1 * s2 - s3) == 0.0);
  Mat g = s3.adjoint() * s3;
  CHECK(operator_norm(g - Mat::Identity(g.rows(), g.cols())) == 0.0);

  // nothing lands in the first r cells
  for (Eigen::Index col = 0; col < s3.cols(); ++col)
    for (Eigen::Index row = 0; row < 3 * 2; ++row) CHECK(s3(row, col) == Cplx(0, 0));

  CHECK_THROWS_AS(shift(ccr, 8, 8), Error);
}

TEST_CASE("truncations") {
  GridCcr ccr = ccr_build(1, 2);
  GridSystem t1 = ccr_truncate(ccr, 1);
  for (int m = 1; m <= 4; ++m) CHECK(t1.dim(m) == m + 1);
  CHECK(t1.kind() == SystemKind::Inclusion);

  GridSystem t0 = ccr_truncate(ccr, 0);
  for (int m = 1; m <= 4; ++m) CHECK(t0.dim(m) == 1);

  GridSystem tfull = ccr_truncate(ccr, 4);
  CHECK(tfull.kind() == SystemKind::Product);
  for (int m = 1; m <= 4; ++m) CHECK(tfull.dim(m) == ccr.sys.dim(m));

  GridCcr wide = ccr_build(2, 2);
  GridSystem w1 = ccr_truncate(wide, 1);
  for (int m = 1; m <= 4; ++m) CHECK(w1.dim(m) == 1 + 2 * m);
}

TEST_CASE("poisson weights") {
  CHECK(poisson_weight(0u, 0.125) == 1.0);
  CHECK(poisson_weight(0b101u, 0.125) == doctest::Approx(1.0 / 64.0).epsilon(1e-15));
  CHECK(poisson_weight(0b1u, 0.25) == 0.25);

  // the weighted configuration pairing reproduces the model inner product
  GridCcr ccr = ccr_build(1, 2);
  Rng rng(59);
  for (int trial = 0; trial < 5; ++trial) {
    Vec x = rng.vector(16), y = rng.vector(16);
    Cplx acc(0, 0);
    for (Eigen::Index flat = 0; flat < 16; ++flat) {
      CcrBasisElement el = ccr_decode(ccr, 4, flat);
      double w = poisson_weight(el.occupied, ccr.delta());
      double scale = std::pow(ccr.delta(), static_cast<double>(el.values.size()));
      acc += w * std::conj(x[flat]) * y[flat] / scale;
    }
    CHECK(std::abs(acc - Cplx(x.dot(y))) < 1e-12);
  }
}

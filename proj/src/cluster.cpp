#include "prodsys/cluster.hpp"

#include <algorithm>
#include <cmath>

namespace prodsys {

namespace {

void require_fine_family(const GridSystem& ambient, const SubsystemFamily& f) {
  if (f.parent != &ambient || f.level != ambient.level())
    raise(Errc::BadInput, "a fine-level family of this ambient system is required");
}

// maximal runs of consecutive set bits, as [start, end) cell ranges
std::vector<std::pair<int, int>> runs_of(std::uint32_t mask, int cells) {
  std::vector<std::pair<int, int>> runs;
  int c = 0;
  while (c < cells) {
    if (mask & (1u << c)) {
      int start = c;
      while (c < cells && (mask & (1u << c))) ++c;
      runs.emplace_back(start, c);
    } else {
      ++c;
    }
  }
  return runs;
}

bool product_subsystem_ok(const SubsystemFamily& f, double tol) {
  if (subsystem_defect(f) > tol) return false;
  for (int i = 1; i < f.cells(); ++i)
    for (int j = 1; i + j <= f.cells(); ++j)
      if (f.at(i + j).rank() != f.at(i).rank() * f.at(j).rank()) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Split spaces and the cluster
// ---------------------------------------------------------------------------

Subspace split_pair_span(const GridSystem& ambient, const SubsystemFamily& f, int t_cells,
                         double tol) {
  require_fine_family(ambient, f);
  if (t_cells < 1 || t_cells > ambient.cells()) raise(Errc::OutOfRange, "duration outside grid");
  Eigen::Index dim = ambient.dim(t_cells);
  std::vector<Mat> pieces;
  Eigen::Index total_cols = 0;
  for (int r = 1; r < t_cells; ++r) {
    Subspace left = complement(f.at(r), tol);
    Subspace right = complement(f.at(t_cells - r), tol);
    if (left.rank() == 0 || right.rank() == 0) continue;
    Mat prod = tensor_op(left.basis, right.basis);
    pieces.push_back(ambient.beta(r, t_cells - r).apply_adjoint_cols(prod));
    total_cols += pieces.back().cols();
  }
  Mat cols(dim, total_cols);
  Eigen::Index at = 0;
  for (const Mat& p : pieces) {
    cols.middleCols(at, p.cols()) = p;
    at += p.cols();
  }
  return orthonormalize(cols, dim, tol);
}

Subspace split_pair_complement(const GridSystem& ambient, const SubsystemFamily& f, int t_cells,
                               double tol) {
  return complement(split_pair_span(ambient, f, t_cells, tol), tol);
}

Subspace mixed_pair_complement(const GridSystem& ambient, const SubsystemFamily& f1,
                               const SubsystemFamily& f2, int t_cells, double tol) {
  require_fine_family(ambient, f1);
  require_fine_family(ambient, f2);
  if (t_cells < 1 || t_cells > ambient.cells()) raise(Errc::OutOfRange, "duration outside grid");
  Eigen::Index dim = ambient.dim(t_cells);
  std::vector<Vec> cols;
  for (int r = 1; r < t_cells; ++r) {
    Subspace left = complement(f1.at(r), tol);
    Subspace right = complement(f2.at(t_cells - r), tol);
    if (left.rank() == 0 || right.rank() == 0) continue;
    Mat prod = tensor_op(left.basis, right.basis);
    Mat pulled = ambient.beta(r, t_cells - r).apply_adjoint_cols(prod);
    for (Eigen::Index c = 0; c < pulled.cols(); ++c) cols.push_back(pulled.col(c));
  }
  return complement(orthonormalize(cols, dim, tol), tol);
}

ClusterResult cluster(const GridSystem& ambient, const SubsystemFamily& f, int coarse_level,
                      double tol) {
  require_fine_family(ambient, f);
  if (coarse_level < 0 || coarse_level >= ambient.level())
    raise(Errc::LevelOrder, "the observation scale must be coarser than the grid");
  int q = 1 << (ambient.level() - coarse_level);

  ClusterResult out;
  out.fine_level = ambient.level();
  out.coarse_level = coarse_level;
  for (int m = 1; m <= q; ++m) {
    out.f_tilde_block.push_back(split_pair_span(ambient, f, m, tol));
    out.f_prime_block.push_back(complement(out.f_tilde_block.back(), tol));
  }
  out.f_check = generated_from_cell_subspace(ambient, out.f_prime_block.back(), coarse_level);
  return out;
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

double FaithfulState::expectation(const Mat& x) const {
  return (density.transpose().cwiseProduct(x)).sum().real();
}

FaithfulState tracial_state(Eigen::Index dim) {
  return FaithfulState{Mat::Identity(dim, dim) / static_cast<double>(dim)};
}

FaithfulState diagonal_state(Eigen::Index dim, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd d(dim);
  double total = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    d[i] = 1.0 + 0.5 * rng.real();
    total += d[i];
  }
  Mat density = Mat::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) density(i, i) = d[i] / total;
  return FaithfulState{std::move(density)};
}

// ---------------------------------------------------------------------------
// Interval projections
// ---------------------------------------------------------------------------

Mat interval_projection_with(const GridSystem& ambient, const Subspace& mid, int s_fine,
                             int t_fine) {
  int n = ambient.cells();
  if (s_fine < 0 || t_fine <= s_fine || t_fine > n)
    raise(Errc::OutOfRange, "interval outside [0,1]");
  if (mid.ambient != ambient.dim(t_fine - s_fine))
    raise(Errc::DimMismatch, "middle subspace lives at the wrong duration");

  DyadicPartition whole;
  whole.durations.push_back(DyadicTime(n, ambient.level()));
  DyadicPartition blocks;
  if (s_fine > 0) blocks.durations.push_back(DyadicTime(s_fine, ambient.level()));
  blocks.durations.push_back(DyadicTime(t_fine - s_fine, ambient.level()));
  if (n - t_fine > 0) blocks.durations.push_back(DyadicTime(n - t_fine, ambient.level()));
  BetaOp b = beta_composite(ambient, whole, blocks);

  Mat op = projector(mid);
  if (s_fine > 0) op = tensor_op(Mat::Identity(ambient.dim(s_fine), ambient.dim(s_fine)), op);
  if (n - t_fine > 0)
    op = tensor_op(op, Mat::Identity(ambient.dim(n - t_fine), ambient.dim(n - t_fine)));
  return b.adjoint().compose(BetaOp::dense(std::move(op)).compose(b)).dense_matrix();
}

Mat interval_projection(const GridSystem& ambient, const SubsystemFamily& f, int s_cells,
                        int t_cells) {
  if (s_cells < 0 || t_cells <= s_cells || t_cells > f.cells())
    raise(Errc::OutOfRange, "interval outside the family grid");
  int q = 1 << (ambient.level() - f.level);
  return interval_projection_with(ambient, f.at(t_cells - s_cells), s_cells * q, t_cells * q);
}

// ---------------------------------------------------------------------------
// Random set distributions
// ---------------------------------------------------------------------------

double RandomSetDistribution::sum() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

double RandomSetDistribution::min() const {
  double m = probs.empty() ? 0.0 : probs[0];
  for (double p : probs) m = std::min(m, p);
  return m;
}

double RandomSetDistribution::avoid(std::uint32_t mask) const {
  double s = 0.0;
  for (std::uint32_t a = 0; a < probs.size(); ++a)
    if ((a & mask) == 0) s += probs[a];
  return s;
}

RandomSetDistribution random_set_distribution(const GridSystem& ambient,
                                              const SubsystemFamily& f,
                                              const FaithfulState& eta, double tol) {
  int m = f.cells();
  if (m > 12) raise(Errc::SizeLimit, "exact distributions are capped at 12 cells");
  Eigen::Index top = ambient.dim(ambient.cells());
  if (eta.density.rows() != top || eta.density.cols() != top)
    raise(Errc::DimMismatch, "state dimension");
  if (std::abs(eta.density.trace().real() - 1.0) > 1e-9 ||
      min_hermitian_eigenvalue(eta.density) <= 1e-12)
    raise(Errc::StateNotFaithful, "state must be positive definite with unit trace");
  if (!product_subsystem_ok(f, std::max(tol, 1e-8)))
    raise(Errc::NotProductSubsystem, "avoidance probabilities need a product subsystem");

  std::uint32_t count = 1u << m;
  std::vector<double> avoid(count, 1.0);

  if (ambient.pure()) {
    // per-cell factorization of the interval projections
    Mat pc = projector(f.at(1));
    Eigen::Index dq = pc.rows();
    for (std::uint32_t mask = 1; mask < count; ++mask) {
      Mat p = (mask & 1u) ? pc : Mat(Mat::Identity(dq, dq));
      for (int c = 1; c < m; ++c)
        p = tensor_op(p, (mask & (1u << c)) ? pc : Mat(Mat::Identity(dq, dq)));
      avoid[mask] = eta.expectation(p);
    }
  } else {
    for (std::uint32_t mask = 1; mask < count; ++mask) {
      Mat p;
      for (auto [s, t] : runs_of(mask, m)) {
        Mat pi = interval_projection(ambient, f, s, t);
        p = p.size() == 0 ? pi : Mat(p * pi);
      }
      avoid[mask] = eta.expectation(p);
    }
  }

  RandomSetDistribution dist;
  dist.cells = m;
  dist.probs.assign(count, 0.0);
  std::uint32_t full = count - 1;
  for (std::uint32_t a = 0; a < count; ++a) {
    // P(Z = A) by inclusion-exclusion over P(Z subset of S) = avoid(S^c)
    double p = 0.0;
    std::uint32_t s = a;
    while (true) {
      int sign_bits = __builtin_popcount(a ^ s);
      double term = avoid[full & ~s];
      p += (sign_bits % 2 == 0) ? term : -term;
      if (s == 0) break;
      s = (s - 1) & a;
    }
    dist.probs[a] = p;
  }
  return dist;
}

AtMostOneReport at_most_one_check(const GridSystem& ambient, const SubsystemFamily& f,
                                  const RandomSetDistribution& dist, const FaithfulState& eta,
                                  int s_cells, int t_cells, double tol) {
  require_fine_family(ambient, f);
  AtMostOneReport rep;
  std::uint32_t interval = 0;
  for (int c = s_cells; c < t_cells; ++c) interval |= (1u << c);
  for (std::uint32_t a = 0; a < dist.probs.size(); ++a)
    if (__builtin_popcount(a & interval) <= 1) rep.measure_side += dist.probs[a];

  Subspace fprime = split_pair_complement(ambient, f, t_cells - s_cells, tol);
  Mat p = interval_projection_with(ambient, fprime, s_cells, t_cells);
  rep.state_side = eta.expectation(p);
  rep.difference = std::abs(rep.measure_side - rep.state_side);
  return rep;
}

std::uint32_t cluster_map(std::uint32_t fine_mask, int fine_level, int coarse_level) {
  int q = 1 << (fine_level - coarse_level);
  std::uint32_t out = 0;
  for (int c = 0; c < (1 << coarse_level); ++c) {
    std::uint32_t window = ((1u << q) - 1u) << (c * q);
    if (__builtin_popcount(fine_mask & window) >= 2) out |= (1u << c);
  }
  return out;
}

PushforwardReport cluster_pushforward_check(const GridSystem& ambient, const SubsystemFamily& f,
                                            const FaithfulState& eta, int coarse_level,
                                            double tol) {
  require_fine_family(ambient, f);
  PushforwardReport rep;
  RandomSetDistribution fine = random_set_distribution(ambient, f, eta, tol);
  ClusterResult cl = cluster(ambient, f, coarse_level, tol);
  int cc = 1 << coarse_level;
  int q = 1 << (ambient.level() - coarse_level);

  // pushforward of the fine distribution through the cluster map
  std::vector<double> pushed(1u << cc, 0.0);
  for (std::uint32_t a = 0; a < fine.probs.size(); ++a)
    pushed[cluster_map(a, ambient.level(), coarse_level)] += fine.probs[a];

  // avoidance of every coarse cell set, straight from the cluster family
  std::vector<double> coarse_avoid(1u << cc, 1.0);
  for (std::uint32_t mask = 1; mask < (1u << cc); ++mask) {
    Mat p;
    for (auto [s, t] : runs_of(mask, cc)) {
      Mat pi = interval_projection(ambient, cl.f_check, s, t);
      p = p.size() == 0 ? pi : Mat(p * pi);
    }
    coarse_avoid[mask] = eta.expectation(p);
  }

  for (std::uint32_t mask = 0; mask < (1u << cc); ++mask) {
    double mu_side = 0.0;
    for (std::uint32_t a = 0; a < fine.probs.size(); ++a)
      if ((cluster_map(a, ambient.level(), coarse_level) & mask) == 0) mu_side += fine.probs[a];
    rep.max_interval_difference =
        std::max(rep.max_interval_difference, std::abs(mu_side - coarse_avoid[mask]));
  }

  // coarse distribution of the cluster family by the same inversion
  RandomSetDistribution coarse = random_set_distribution(ambient, cl.f_check, eta, tol);
  double tv = 0.0;
  for (std::uint32_t a = 0; a < pushed.size(); ++a) tv += std::abs(pushed[a] - coarse.probs[a]);
  rep.total_variation = 0.5 * tv;

  // cluster projections against per-coarse-cell products of the block space
  const Subspace& block = cl.f_prime_block.back();
  for (int s = 0; s < cc; ++s)
    for (int t = s + 1; t <= cc; ++t) {
      Mat lhs = interval_projection(ambient, cl.f_check, s, t);
      Mat rhs;
      for (int c = s; c < t; ++c) {
        Mat pc = interval_projection_with(ambient, block, c * q, (c + 1) * q);
        rhs = rhs.size() == 0 ? pc : Mat(rhs * pc);
      }
      rep.factorization_defect = std::max(rep.factorization_defect, operator_norm(lhs - rhs));
    }
  return rep;
}

// ---------------------------------------------------------------------------
// X spaces
// ---------------------------------------------------------------------------

XSpaceReport x_space_checks(const GridSystem& ambient, const VectorFamily& u, int coarse_level,
                            double tol) {
  UnitReport urep = check_unit(u, tol);
  if (!urep.normalized) raise(Errc::NotNormalized, "X spaces are stated for a normalized unit");
  SubsystemFamily f = unit_line_family(ambient, u.values);
  int n = ambient.cells();
  int q = 1 << (ambient.level() - coarse_level);
  int cc = 1 << coarse_level;

  // durations whose slices exceed the dense guard are skipped; the checks
  // are scale-uniform and run in full at the sizes that fit
  constexpr Eigen::Index kComplementGuard = 2048;
  int reach = n;
  while (reach > 1 && ambient.dim(reach) > kComplementGuard) --reach;

  std::vector<Subspace> fprime;
  for (int m = 1; m <= reach; ++m) fprime.push_back(split_pair_complement(ambient, f, m, tol));

  XSpaceReport rep;
  // unit-padded spaces stay inside the longer complement
  for (int s = 1; s < reach; ++s)
    for (int t = 1; s + t <= reach; ++t) {
      const Subspace& target = fprime[static_cast<std::size_t>(s + t - 1)];
      Mat left = ambient.beta(s, t).apply_adjoint_cols(
          tensor_op(Mat(u.at(s)), fprime[static_cast<std::size_t>(t - 1)].basis));
      Mat right = ambient.beta(s, t).apply_adjoint_cols(
          tensor_op(fprime[static_cast<std::size_t>(s - 1)].basis, Mat(u.at(t))));
      rep.padding_containment = std::max(
          rep.padding_containment, containment_defect(Subspace{target.ambient, left}, target));
      rep.padding_containment = std::max(
          rep.padding_containment, containment_defect(Subspace{target.ambient, right}, target));
    }

  auto x_space = [&](int m_fine) {
    const Subspace& fp = fprime[static_cast<std::size_t>(m_fine - 1)];
    const Vec& um = u.at(m_fine);
    Mat cols(fp.ambient, fp.rank());
    for (Eigen::Index c = 0; c < fp.rank(); ++c)
      cols.col(c) = fp.basis.col(c) - um * um.dot(fp.basis.col(c));
    return orthonormalize(cols, fp.ambient, tol);
  };

  if (q > reach) {
    rep.last_window_dim = -1;
    return rep;
  }
  Subspace x1 = x_space(q);
  rep.dim_x_cell = x1.rank();
  if (n >= 2 * q && 2 * q <= reach) {
    Subspace x2 = x_space(2 * q);
    rep.dim_x_two_cells = x2.rank();
    Mat left = ambient.beta(q, q).apply_adjoint_cols(tensor_op(Mat(u.at(q)), x1.basis));
    Mat right = ambient.beta(q, q).apply_adjoint_cols(tensor_op(x1.basis, Mat(u.at(q))));
    for (Eigen::Index i = 0; i < left.cols(); ++i)
      for (Eigen::Index j = 0; j < right.cols(); ++j)
        rep.summand_orthogonality =
            std::max(rep.summand_orthogonality, std::abs(left.col(i).dot(right.col(j))));
    Mat both(left.rows(), left.cols() + right.cols());
    both.leftCols(left.cols()) = left;
    both.rightCols(right.cols()) = right;
    Subspace sum = orthonormalize(both, left.rows(), tol);
    rep.direct_sum_defect = projector_distance(sum, x2);
    for (Eigen::Index i = 0; i < left.cols(); ++i)
      rep.shift_isometry_defect =
          std::max(rep.shift_isometry_defect, std::abs(left.col(i).norm() - 1.0));
  }

  // shift embeddings into the top slice: S_r x = u_{r} (x) x
  auto shifted_range = [&](int r_fine) {
    Subspace x = x_space(n - r_fine);
    Mat cols = ambient.beta(r_fine, n - r_fine)
                   .apply_adjoint_cols(tensor_op(Mat(u.at(r_fine)), x.basis));
    return orthonormalize(cols, ambient.dim(n), tol);
  };

  if (cc >= 2 && n - q <= reach) {
    // semigroup law on a coarse step pair
    if (n - 2 * q >= 1) {
      Subspace xs = x_space(n - 2 * q);
      Mat once = ambient.beta(q, n - q).apply_adjoint_cols(tensor_op(
          Mat(u.at(q)),
          ambient.beta(q, n - 2 * q).apply_adjoint_cols(tensor_op(Mat(u.at(q)), xs.basis))));
      Mat direct =
          ambient.beta(2 * q, n - 2 * q).apply_adjoint_cols(tensor_op(Mat(u.at(2 * q)), xs.basis));
      rep.shift_semigroup_defect = operator_norm(once - direct);
    }

    Subspace inter = shifted_range(q);
    rep.purity_decay = true;
    for (int r = 2; r < cc; ++r) inter = subspace_intersection(inter, shifted_range(r * q), 1e-8);
    rep.last_window_dim = inter.rank();
    // the window shrinks by one coarse cell per step and empties at the horizon
    for (int r = 1; r < cc; ++r) {
      Subspace v = shifted_range(r * q);
      Subspace acc = v;
      for (int rr = 1; rr <= r; ++rr) acc = subspace_intersection(acc, shifted_range(rr * q), 1e-8);
      if (acc.rank() != static_cast<Eigen::Index>((cc - r)) * rep.dim_x_cell)
        rep.purity_decay = false;
    }
    if (rep.last_window_dim != rep.dim_x_cell) rep.purity_decay = false;
  } else {
    rep.last_window_dim = -1;  // no shift steps fit the horizon, nothing to decay
  }
  return rep;
}

}  // namespace prodsys

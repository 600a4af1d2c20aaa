#include "prodsys/ccr.hpp"

#include <cmath>

namespace prodsys {

GridCcr ccr_build(int k, int level, Eigen::Index slice_cap) {
  if (k < 1 || level < 1) raise(Errc::BadInput, "ccr needs k >= 1 and level >= 1");
  double top = std::pow(static_cast<double>(1 + k), static_cast<double>(1 << level));
  if (top > static_cast<double>(slice_cap))
    raise(Errc::SizeLimit, "top slice dimension exceeds the slice cap");
  GridCcr ccr;
  ccr.k = k;
  ccr.level = level;
  ccr.sys = GridSystem::pure_tensor(level, 1 + k, SystemKind::Product);
  return ccr;
}

VectorFamily ccr_vacuum(const GridCcr& ccr) {
  Vec cell = Vec::Zero(ccr.cell_dim());
  cell[0] = 1.0;
  return unit_from_cell(ccr.sys, cell);
}

Vec exp_vector(const GridCcr& ccr, const StepFunction& f, int t_cells) {
  if (t_cells < 1 || t_cells > ccr.sys.cells()) raise(Errc::OutOfRange, "exp vector horizon");
  if (static_cast<int>(f.cell_values.size()) < t_cells)
    raise(Errc::BadInput, "step function does not cover the horizon");
  double rd = std::sqrt(ccr.delta());
  Vec out;
  for (int c = 0; c < t_cells; ++c) {
    const Vec& val = f.at_cell(c);
    if (val.size() != ccr.k) raise(Errc::DimMismatch, "step value dimension");
    Vec cell(ccr.cell_dim());
    cell[0] = 1.0;
    cell.segment(1, ccr.k) = rd * val;
    out = c == 0 ? cell : Vec(tensor(out, cell));
  }
  return out;
}

AdditiveFamily vacuum_root(const GridCcr& ccr, const Vec& c) {
  if (c.size() != ccr.k) raise(Errc::DimMismatch, "root density dimension");
  Vec cell = Vec::Zero(ccr.cell_dim());
  cell.segment(1, ccr.k) = std::sqrt(ccr.delta()) * c;
  return additive_from_cell(ccr_vacuum(ccr), cell);
}

RootSpace solve_vacuum_roots(const GridCcr& ccr) {
  return root_space(ccr.sys, ccr_vacuum(ccr));
}

Mat shift(const GridCcr& ccr, int r_cells, int t_cells) {
  if (r_cells < 0 || t_cells <= r_cells || t_cells > ccr.sys.cells())
    raise(Errc::OutOfRange, "shift needs 0 <= r < t within the grid");
  int src_cells = t_cells - r_cells;
  Mat s = Mat::Zero(static_cast<Eigen::Index>(t_cells) * ccr.k,
                    static_cast<Eigen::Index>(src_cells) * ccr.k);
  for (int c = 0; c < src_cells; ++c)
    for (int v = 0; v < ccr.k; ++v)
      s((c + r_cells) * ccr.k + v, c * ccr.k + v) = 1.0;
  return s;
}

namespace {

int popcount32(std::uint32_t x) {
  int n = 0;
  while (x) {
    n += static_cast<int>(x & 1u);
    x >>= 1;
  }
  return n;
}

// flat indices of the <= N particle configurations, in flat order
std::vector<Eigen::Index> truncated_indices(const GridCcr& ccr, int m, int max_particles) {
  std::vector<Eigen::Index> keep;
  Eigen::Index full = 1;
  for (int i = 0; i < m; ++i) full *= ccr.cell_dim();
  for (Eigen::Index flat = 0; flat < full; ++flat) {
    Eigen::Index rem = flat;
    int particles = 0;
    for (int c = 0; c < m; ++c) {
      if (rem % ccr.cell_dim() != 0) ++particles;
      rem /= ccr.cell_dim();
    }
    if (particles <= max_particles) keep.push_back(flat);
  }
  return keep;
}

}  // namespace

GridSystem ccr_truncate(const GridCcr& ccr, int max_particles) {
  if (max_particles < 0) raise(Errc::BadInput, "particle cap is nonnegative");
  if (max_particles >= ccr.sys.cells()) return ccr.sys;

  int n = ccr.sys.cells();
  std::vector<std::vector<Eigen::Index>> keep;  // per m
  std::vector<std::map<Eigen::Index, Eigen::Index>> pos(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> dims;
  for (int m = 1; m <= n; ++m) {
    keep.push_back(truncated_indices(ccr, m, max_particles));
    dims.push_back(static_cast<Eigen::Index>(keep.back().size()));
    for (Eigen::Index p = 0; p < dims.back(); ++p)
      pos[static_cast<std::size_t>(m - 1)][keep.back()[static_cast<std::size_t>(p)]] = p;
  }

  std::map<std::pair<int, int>, BetaOp> betas;
  for (int i = 1; i < n; ++i)
    for (int j = 1; i + j <= n; ++j) {
      Mat b = Mat::Zero(dims[i - 1] * dims[j - 1], dims[i + j - 1]);
      Eigen::Index right = 1;
      for (int c = 0; c < j; ++c) right *= ccr.cell_dim();
      for (Eigen::Index col = 0; col < dims[i + j - 1]; ++col) {
        Eigen::Index flat = keep[static_cast<std::size_t>(i + j - 1)][static_cast<std::size_t>(col)];
        Eigen::Index left_flat = flat / right;
        Eigen::Index right_flat = flat % right;
        // both halves of a <= N configuration stay <= N
        Eigen::Index lp = pos[static_cast<std::size_t>(i - 1)].at(left_flat);
        Eigen::Index rp = pos[static_cast<std::size_t>(j - 1)].at(right_flat);
        b(lp * dims[j - 1] + rp, col) = 1.0;
      }
      betas[{i, j}] = BetaOp::dense(std::move(b));
    }
  return GridSystem::stored(ccr.level, std::move(dims), std::move(betas), SystemKind::Inclusion);
}

double poisson_weight(std::uint32_t occupied_mask, double delta) {
  return std::pow(delta, popcount32(occupied_mask));
}

CcrBasisElement ccr_decode(const GridCcr& ccr, int m_cells, Eigen::Index flat) {
  CcrBasisElement el;
  el.values.assign(static_cast<std::size_t>(m_cells), -1);
  std::vector<int> digits(static_cast<std::size_t>(m_cells));
  for (int c = m_cells - 1; c >= 0; --c) {
    digits[static_cast<std::size_t>(c)] = static_cast<int>(flat % ccr.cell_dim());
    flat /= ccr.cell_dim();
  }
  std::vector<int> values;
  for (int c = 0; c < m_cells; ++c) {
    if (digits[static_cast<std::size_t>(c)] > 0) {
      el.occupied |= (1u << c);
      values.push_back(digits[static_cast<std::size_t>(c)] - 1);
    }
  }
  el.values = std::move(values);
  return el;
}

Eigen::Index ccr_encode(const GridCcr& ccr, int m_cells, const CcrBasisElement& el) {
  Eigen::Index flat = 0;
  std::size_t vpos = 0;
  for (int c = 0; c < m_cells; ++c) {
    int digit = 0;
    if (el.occupied & (1u << c)) digit = el.values[vpos++] + 1;
    flat = flat * ccr.cell_dim() + digit;
  }
  return flat;
}

}  // namespace prodsys

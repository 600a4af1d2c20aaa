#pragma once

#include <cstdint>
#include <vector>

#include "prodsys/units.hpp"

namespace prodsys {

// Grid model of the CCR flow of index k: the cell space is C (+) C^k
// (vacuum (+) one particle carrying a value in C^k), slices are cell tensor
// powers and the connecting maps split configurations by reindexing. Basis
// vectors are indexed by (occupied cell set, value per occupied cell); the
// one-particle amplitude carries sqrt(delta) so grid inner products are the
// L^2 Riemann sums.
struct GridCcr {
  int k = 1;
  int level = 1;
  GridSystem sys;

  double delta() const { return 1.0 / static_cast<double>(sys.cells()); }
  Eigen::Index cell_dim() const { return 1 + k; }
};

inline constexpr Eigen::Index kDefaultSliceCap = 4096;

GridCcr ccr_build(int k, int level, Eigen::Index slice_cap = kDefaultSliceCap);

VectorFamily ccr_vacuum(const GridCcr& ccr);

// Piecewise-constant representative of f in L^2([0,1], C^k).
struct StepFunction {
  std::vector<Vec> cell_values;  // one C^k value per fine cell

  const Vec& at_cell(int c) const { return cell_values[static_cast<std::size_t>(c)]; }
};

// Tensor over the first t_cells cells of (1 (+) sqrt(delta) f_c); satisfies
// <e(f), e(g)> = prod_c (1 + delta <f_c, g_c>).
Vec exp_vector(const GridCcr& ccr, const StepFunction& f, int t_cells);

// The root of the vacuum with constant density c: one particle of value
// sqrt(delta) c spread over the cells.
AdditiveFamily vacuum_root(const GridCcr& ccr, const Vec& c);

// Full solution space of the cell-level additivity + orthogonality system.
RootSpace solve_vacuum_roots(const GridCcr& ccr);

// Right shift by r cells on the one-particle sector, as an isometry from the
// grid L^2 space over t - r cells into the one over t cells.
Mat shift(const GridCcr& ccr, int r_cells, int t_cells);

// Restriction to configurations of at most max_particles points; an inclusion
// system whose inductive limit recovers the full flow's generated subsystem.
GridSystem ccr_truncate(const GridCcr& ccr, int max_particles);

// Quadrature weight of a configuration under the grid Poisson measure.
double poisson_weight(std::uint32_t occupied_mask, double delta);

// ---------------------------------------------------------------------------
// Basis bookkeeping (configuration picture)
// ---------------------------------------------------------------------------

struct CcrBasisElement {
  std::uint32_t occupied = 0;       // bitmask over cells, bit 0 = earliest
  std::vector<int> values;          // value index in 0..k-1 per occupied cell
};

CcrBasisElement ccr_decode(const GridCcr& ccr, int m_cells, Eigen::Index flat);
Eigen::Index ccr_encode(const GridCcr& ccr, int m_cells, const CcrBasisElement& el);

}  // namespace prodsys

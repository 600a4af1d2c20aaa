#include "prodsys/system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace prodsys {

namespace {

constexpr Eigen::Index kDenseEntryCap = Eigen::Index(1) << 24;

std::vector<Eigen::Index> inverse_perm(const std::vector<Eigen::Index>& src) {
  std::vector<Eigen::Index> inv(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) inv[static_cast<std::size_t>(src[i])] = static_cast<Eigen::Index>(i);
  return inv;
}

// Permutation reindexing a tensor product: output slot p carries input leg
// out_legs[p]. Left factor is the slow index on both sides.
BetaOp leg_permutation(const std::vector<Eigen::Index>& leg_dims,
                       const std::vector<std::size_t>& out_legs) {
  Eigen::Index total = 1;
  for (auto d : leg_dims) total *= d;
  std::vector<Eigen::Index> in_strides(leg_dims.size(), 1);
  for (std::size_t l = leg_dims.size(); l-- > 1;)
    in_strides[l - 1] = in_strides[l] * leg_dims[l];

  std::vector<Eigen::Index> src(static_cast<std::size_t>(total));
  std::vector<Eigen::Index> digits(out_legs.size());
  for (Eigen::Index o = 0; o < total; ++o) {
    Eigen::Index rem = o;
    for (std::size_t p = out_legs.size(); p-- > 0;) {
      Eigen::Index d = leg_dims[out_legs[p]];
      digits[p] = rem % d;
      rem /= d;
    }
    Eigen::Index in_flat = 0;
    for (std::size_t p = 0; p < out_legs.size(); ++p)
      in_flat += digits[p] * in_strides[out_legs[p]];
    src[static_cast<std::size_t>(o)] = in_flat;
  }
  return BetaOp::perm(std::move(src));
}

}  // namespace

// ---------------------------------------------------------------------------
// BetaOp
// ---------------------------------------------------------------------------

BetaOp BetaOp::identity(Eigen::Index dim) {
  BetaOp b;
  b.kind_ = Kind::Identity;
  b.rows_ = b.cols_ = dim;
  return b;
}

BetaOp BetaOp::perm(std::vector<Eigen::Index> src) {
  BetaOp b;
  b.kind_ = Kind::Perm;
  b.rows_ = b.cols_ = static_cast<Eigen::Index>(src.size());
  b.src_ = std::make_shared<const std::vector<Eigen::Index>>(std::move(src));
  return b;
}

BetaOp BetaOp::dense(Mat m) {
  BetaOp b;
  b.kind_ = Kind::Dense;
  b.rows_ = m.rows();
  b.cols_ = m.cols();
  b.mat_ = std::make_shared<const Mat>(std::move(m));
  return b;
}

Vec BetaOp::apply(const Vec& x) const {
  if (x.size() != cols_) raise(Errc::DimMismatch, "BetaOp::apply");
  switch (kind_) {
    case Kind::Identity: return x;
    case Kind::Perm: {
      Vec y(rows_);
      for (Eigen::Index i = 0; i < rows_; ++i) y[i] = x[(*src_)[static_cast<std::size_t>(i)]];
      return y;
    }
    case Kind::Dense: return (*mat_) * x;
  }
  return x;
}

Vec BetaOp::apply_adjoint(const Vec& y) const {
  if (y.size() != rows_) raise(Errc::DimMismatch, "BetaOp::apply_adjoint");
  switch (kind_) {
    case Kind::Identity: return y;
    case Kind::Perm: {
      Vec x(cols_);
      for (Eigen::Index i = 0; i < rows_; ++i) x[(*src_)[static_cast<std::size_t>(i)]] = y[i];
      return x;
    }
    case Kind::Dense: return mat_->adjoint() * y;
  }
  return y;
}

Mat BetaOp::apply_cols(const Mat& x) const {
  if (x.rows() != cols_) raise(Errc::DimMismatch, "BetaOp::apply_cols");
  switch (kind_) {
    case Kind::Identity: return x;
    case Kind::Perm: {
      Mat y(rows_, x.cols());
      for (Eigen::Index i = 0; i < rows_; ++i) y.row(i) = x.row((*src_)[static_cast<std::size_t>(i)]);
      return y;
    }
    case Kind::Dense: return (*mat_) * x;
  }
  return x;
}

Mat BetaOp::apply_adjoint_cols(const Mat& y) const {
  if (y.rows() != rows_) raise(Errc::DimMismatch, "BetaOp::apply_adjoint_cols");
  switch (kind_) {
    case Kind::Identity: return y;
    case Kind::Perm: {
      Mat x(cols_, y.cols());
      for (Eigen::Index i = 0; i < rows_; ++i) x.row((*src_)[static_cast<std::size_t>(i)]) = y.row(i);
      return x;
    }
    case Kind::Dense: return mat_->adjoint() * y;
  }
  return y;
}

BetaOp BetaOp::compose(const BetaOp& other) const {
  if (cols_ != other.rows_) raise(Errc::DimMismatch, "BetaOp::compose");
  if (kind_ == Kind::Identity) return other;
  if (other.kind_ == Kind::Identity) return *this;
  if (kind_ == Kind::Perm && other.kind_ == Kind::Perm) {
    std::vector<Eigen::Index> src(static_cast<std::size_t>(rows_));
    for (Eigen::Index i = 0; i < rows_; ++i)
      src[static_cast<std::size_t>(i)] =
          (*other.src_)[static_cast<std::size_t>((*src_)[static_cast<std::size_t>(i)])];
    return perm(std::move(src));
  }
  if (kind_ == Kind::Perm) return dense(apply_cols(*other.mat_));
  if (other.kind_ == Kind::Perm) {
    // this is dense; permute its columns
    auto inv = inverse_perm(*other.src_);
    Mat out(rows_, other.cols_);
    for (Eigen::Index k = 0; k < other.cols_; ++k)
      out.col(k) = mat_->col(inv[static_cast<std::size_t>(k)]);
    return dense(std::move(out));
  }
  return dense((*mat_) * (*other.mat_));
}

BetaOp BetaOp::tensor(const BetaOp& other) const {
  if (kind_ == Kind::Identity && other.kind_ == Kind::Identity)
    return identity(rows_ * other.rows_);
  bool structured = kind_ != Kind::Dense && other.kind_ != Kind::Dense;
  if (structured) {
    std::vector<Eigen::Index> src(static_cast<std::size_t>(rows_ * other.rows_));
    for (Eigen::Index i = 0; i < rows_; ++i) {
      Eigen::Index si = kind_ == Kind::Identity ? i : (*src_)[static_cast<std::size_t>(i)];
      for (Eigen::Index k = 0; k < other.rows_; ++k) {
        Eigen::Index sk =
            other.kind_ == Kind::Identity ? k : (*other.src_)[static_cast<std::size_t>(k)];
        src[static_cast<std::size_t>(i * other.rows_ + k)] = si * other.cols_ + sk;
      }
    }
    return perm(std::move(src));
  }
  return dense(tensor_op(dense_matrix(), other.dense_matrix()));
}

BetaOp BetaOp::adjoint() const {
  switch (kind_) {
    case Kind::Identity: return *this;
    case Kind::Perm: return perm(inverse_perm(*src_));
    case Kind::Dense: return dense(mat_->adjoint());
  }
  return *this;
}

Mat BetaOp::dense_matrix() const {
  if (rows_ * cols_ > kDenseEntryCap)
    raise(Errc::SizeLimit, "refusing to materialize a dense operator this large");
  switch (kind_) {
    case Kind::Identity: return Mat::Identity(rows_, cols_);
    case Kind::Perm: {
      Mat m = Mat::Zero(rows_, cols_);
      for (Eigen::Index i = 0; i < rows_; ++i) m(i, (*src_)[static_cast<std::size_t>(i)]) = 1.0;
      return m;
    }
    case Kind::Dense: return *mat_;
  }
  return Mat();
}

double BetaOp::isometry_defect() const {
  if (kind_ != Kind::Dense) return 0.0;  // exact for structured kinds
  Mat g = mat_->adjoint() * (*mat_);
  return operator_norm(g - Mat::Identity(cols_, cols_));
}

bool BetaOp::is_square_unitary(double tol) const {
  if (rows_ != cols_) return false;
  if (kind_ != Kind::Dense) return true;
  Mat g = (*mat_) * mat_->adjoint();
  return isometry_defect() <= tol &&
         operator_norm(g - Mat::Identity(rows_, rows_)) <= tol;
}

double BetaOp::distance(const BetaOp& a, const BetaOp& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) raise(Errc::DimMismatch, "BetaOp::distance");
  if (a.kind_ != Kind::Dense && b.kind_ != Kind::Dense) {
    // ||P - Q|| = ||I - P^-1 Q||, exact from the cycle structure
    std::vector<Eigen::Index> rel(static_cast<std::size_t>(a.rows_));
    for (Eigen::Index i = 0; i < a.rows_; ++i) {
      Eigen::Index ai = a.kind_ == Kind::Identity ? i : (*a.src_)[static_cast<std::size_t>(i)];
      Eigen::Index bi = b.kind_ == Kind::Identity ? i : (*b.src_)[static_cast<std::size_t>(i)];
      rel[static_cast<std::size_t>(ai)] = bi;
    }
    std::vector<bool> seen(rel.size(), false);
    double worst = 0.0;
    for (std::size_t i = 0; i < rel.size(); ++i) {
      if (seen[i]) continue;
      std::size_t len = 0, j = i;
      while (!seen[j]) {
        seen[j] = true;
        j = static_cast<std::size_t>(rel[j]);
        ++len;
      }
      if (len > 1) worst = std::max(worst, 2.0 * std::sin(M_PI * std::floor(len / 2.0) / len));
    }
    return worst;
  }
  return operator_norm(a.dense_matrix() - b.dense_matrix());
}

// ---------------------------------------------------------------------------
// GridSystem
// ---------------------------------------------------------------------------

GridSystem GridSystem::pure_tensor(int level, Eigen::Index cell_dim, SystemKind kind) {
  if (level < 0 || cell_dim < 1) raise(Errc::BadInput, "pure tensor system parameters");
  GridSystem s;
  s.level_ = level;
  s.kind_ = kind;
  s.pure_ = true;
  s.cell_dim_ = cell_dim;
  return s;
}

GridSystem GridSystem::stored(int level, std::vector<Eigen::Index> dims,
                              std::map<std::pair<int, int>, BetaOp> betas, SystemKind kind) {
  GridSystem s;
  s.level_ = level;
  s.kind_ = kind;
  s.pure_ = false;
  if (static_cast<int>(dims.size()) != (1 << level))
    raise(Errc::DimMismatch, "dims must cover every grid time");
  s.dims_ = std::move(dims);
  s.betas_ = std::make_shared<const std::map<std::pair<int, int>, BetaOp>>(std::move(betas));
  return s;
}

Eigen::Index GridSystem::dim(int m) const {
  if (m < 1 || m > cells()) raise(Errc::OutOfRange, "slice index outside the grid");
  if (pure_) {
    Eigen::Index d = 1;
    for (int i = 0; i < m; ++i) d *= cell_dim_;
    return d;
  }
  return dims_[static_cast<std::size_t>(m - 1)];
}

BetaOp GridSystem::beta(int i, int j) const {
  if (i < 1 || j < 1 || i + j > cells()) raise(Errc::OutOfRange, "beta pair outside the grid");
  if (pure_) return BetaOp::identity(dim(i + j));
  auto it = betas_->find({i, j});
  if (it == betas_->end()) raise(Errc::BadInput, "missing connecting map");
  return it->second;
}

BetaOp GridSystem::to_finest(int m) const {
  if (pure_) return BetaOp::identity(dim(m));
  if (m == 1) return BetaOp::identity(dim(1));
  BetaOp head = beta(1, m - 1);
  BetaOp tail = BetaOp::identity(dim(1)).tensor(to_finest(m - 1));
  return tail.compose(head);
}

nlohmann::json GridSystem::to_json() const {
  nlohmann::json j;
  j["level"] = level_;
  j["kind"] = kind_ == SystemKind::Product ? "product" : "inclusion";
  nlohmann::json dims = nlohmann::json::array();
  for (int m = 1; m <= cells(); ++m) dims.push_back(dim(m));
  j["dims"] = dims;
  nlohmann::json betas = nlohmann::json::array();
  for (int i = 1; i < cells(); ++i)
    for (int jj = 1; i + jj <= cells(); ++jj)
      betas.push_back(nlohmann::json{{"s_cells", i},
                                     {"t_cells", jj},
                                     {"op", mat_to_json(beta(i, jj).dense_matrix())}});
  j["betas"] = betas;
  return j;
}

GridSystem GridSystem::from_json(const nlohmann::json& j) {
  int level = j.at("level").get<int>();
  SystemKind kind =
      j.at("kind").get<std::string>() == "product" ? SystemKind::Product : SystemKind::Inclusion;
  std::vector<Eigen::Index> dims;
  for (const auto& d : j.at("dims")) dims.push_back(d.get<Eigen::Index>());
  std::map<std::pair<int, int>, BetaOp> betas;
  for (const auto& b : j.at("betas")) {
    int i = b.at("s_cells").get<int>();
    int jj = b.at("t_cells").get<int>();
    betas[{i, jj}] = BetaOp::dense(mat_from_json(b.at("op")));
  }
  return stored(level, std::move(dims), std::move(betas), kind);
}

// ---------------------------------------------------------------------------
// Structure checks
// ---------------------------------------------------------------------------

StructureReport check_system(const GridSystem& sys, double tol) {
  StructureReport rep;
  int n = sys.cells();
  for (int i = 1; i < n; ++i)
    for (int j = 1; i + j <= n; ++j) {
      BetaOp b = sys.beta(i, j);
      if (b.cols() != sys.dim(i + j) || b.rows() != sys.dim(i) * sys.dim(j))
        raise(Errc::DimMismatch, "connecting map shape disagrees with slice dims");
      rep.isometry_defect = std::max(rep.isometry_defect, b.isometry_defect());
      if (!b.is_square_unitary(tol)) rep.surjective = false;
    }
  for (int r = 1; r <= n - 2; ++r)
    for (int s = 1; r + s <= n - 1; ++s)
      for (int t = 1; r + s + t <= n; ++t) {
        BetaOp lhs = sys.beta(r, s).tensor(BetaOp::identity(sys.dim(t))).compose(sys.beta(r + s, t));
        BetaOp rhs = BetaOp::identity(sys.dim(r)).tensor(sys.beta(s, t)).compose(sys.beta(r, s + t));
        rep.coassociativity_defect =
            std::max(rep.coassociativity_defect, BetaOp::distance(lhs, rhs));
      }
  rep.passed = rep.isometry_defect <= tol && rep.coassociativity_defect <= tol &&
               (sys.kind() == SystemKind::Inclusion || rep.surjective);
  return rep;
}

Eigen::Index partition_dim(const GridSystem& sys, const DyadicPartition& p) {
  Eigen::Index d = 1;
  for (const auto& dur : p.durations) d *= sys.dim(static_cast<int>(dur.units_at(sys.level())));
  return d;
}

namespace {

// Composite of connecting maps from one duration onto an ordered block of
// durations, peeling factors from the left.
BetaOp block_composite(const GridSystem& sys, const std::vector<DyadicTime>& block) {
  int total = 0;
  for (const auto& d : block) total += static_cast<int>(d.units_at(sys.level()));
  if (block.size() == 1) return BetaOp::identity(sys.dim(total));
  int head = static_cast<int>(block[0].units_at(sys.level()));
  BetaOp first = sys.beta(head, total - head);
  std::vector<DyadicTime> rest(block.begin() + 1, block.end());
  BetaOp tail = BetaOp::identity(sys.dim(head)).tensor(block_composite(sys, rest));
  return tail.compose(first);
}

}  // namespace

BetaOp beta_composite(const GridSystem& sys, const DyadicPartition& coarse,
                      const DyadicPartition& fine) {
  auto witness = refines(coarse, fine);
  if (!witness) raise(Errc::NotRefinement, "fine partition does not refine the coarse one");
  BetaOp out;
  bool started = false;
  for (const auto& block : witness->blocks) {
    BetaOp piece = block_composite(sys, block.durations);
    out = started ? out.tensor(piece) : piece;
    started = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inductive limit
// ---------------------------------------------------------------------------

BetaOp InductiveLimit::inject(const DyadicPartition& p) const {
  return beta_composite(source, p, finest(p.total(), source.level()));
}

BetaOp InductiveLimit::embed(int m) const {
  DyadicPartition whole;
  whole.durations.push_back(DyadicTime(m, source.level()));
  return inject(whole);
}

InductiveLimit inductive_limit(const GridSystem& sys, double tol) {
  StructureReport rep = check_system(sys, tol);
  if (!(rep.isometry_defect <= tol && rep.coassociativity_defect <= tol))
    raise(Errc::NotInclusionSystem, "structure defects exceed tolerance");
  InductiveLimit lim;
  lim.prod = GridSystem::pure_tensor(sys.level(), sys.dim(1), SystemKind::Product);
  lim.source = sys;
  return lim;
}

// ---------------------------------------------------------------------------
// Subsystem families
// ---------------------------------------------------------------------------

const Subspace& SubsystemFamily::at(int m) const {
  if (m < 1 || m > cells()) raise(Errc::OutOfRange, "family index outside its grid");
  return spaces[static_cast<std::size_t>(m - 1)];
}

int SubsystemFamily::parent_cells(int m) const {
  return m << (parent->level() - level);
}

SubsystemFamily full_family(const GridSystem& sys) {
  SubsystemFamily f;
  f.parent = &sys;
  f.level = sys.level();
  for (int m = 1; m <= sys.cells(); ++m) {
    Eigen::Index d = sys.dim(m);
    f.spaces.push_back(Subspace{d, Mat::Identity(d, d)});
  }
  return f;
}

SubsystemFamily unit_line_family(const GridSystem& sys, const std::vector<Vec>& unit_values) {
  if (static_cast<int>(unit_values.size()) != sys.cells())
    raise(Errc::DimMismatch, "unit family must cover every grid time");
  SubsystemFamily f;
  f.parent = &sys;
  f.level = sys.level();
  for (int m = 1; m <= sys.cells(); ++m) {
    Mat col(unit_values[static_cast<std::size_t>(m - 1)].size(), 1);
    col.col(0) = unit_values[static_cast<std::size_t>(m - 1)];
    f.spaces.push_back(orthonormalize(col, col.rows()));
  }
  return f;
}

double subsystem_defect(const SubsystemFamily& f) {
  const GridSystem& sys = *f.parent;
  int q = 1 << (sys.level() - f.level);
  double worst = 0.0;
  for (int i = 1; i < f.cells(); ++i)
    for (int j = 1; i + j <= f.cells(); ++j) {
      BetaOp b = sys.beta(i * q, j * q);
      Mat image = b.apply_cols(f.at(i + j).basis);
      Subspace target = tensor_subspace(f.at(i), f.at(j));
      worst = std::max(worst, containment_defect(Subspace{image.rows(), image}, target));
    }
  return worst;
}

SubsystemFamily generated_from_cell_subspace(const GridSystem& prod, const Subspace& cell,
                                             int result_level) {
  int q = 1 << (prod.level() - result_level);
  SubsystemFamily out;
  out.parent = &prod;
  out.level = result_level;
  for (int m = 1; m <= (1 << result_level); ++m) {
    DyadicPartition whole;
    whole.durations.push_back(DyadicTime(m, result_level));
    DyadicPartition blocks;
    blocks.durations.assign(static_cast<std::size_t>(m), DyadicTime(1, result_level));
    BetaOp b = beta_composite(prod, whole, blocks);
    Mat power = cell.basis;
    for (int i = 1; i < m; ++i) power = tensor_op(power, cell.basis);
    Mat pulled = b.apply_adjoint_cols(power);
    out.spaces.push_back(Subspace{prod.dim(m * q), std::move(pulled)});
  }
  return out;
}

SubsystemFamily generated_subsystem(const GridSystem& prod, const SubsystemFamily& seed,
                                    double tol) {
  if (prod.kind() != SystemKind::Product)
    raise(Errc::NotProduct, "generation requires a product system");
  if (subsystem_defect(seed) > tol)
    raise(Errc::NotSubsystem, "seed violates the inclusion-subsystem property");
  return generated_from_cell_subspace(prod, seed.at(1), seed.level);
}

SubsystemFamily generated_at_level(const GridSystem& prod, const SubsystemFamily& seed,
                                   int coarse_level, double tol) {
  if (coarse_level > seed.level) raise(Errc::LevelOrder, "generation level coarser than the seed");
  if (prod.kind() != SystemKind::Product)
    raise(Errc::NotProduct, "generation requires a product system");
  if (subsystem_defect(seed) > tol)
    raise(Errc::NotSubsystem, "seed violates the inclusion-subsystem property");
  return generated_from_cell_subspace(prod, seed.at(1 << (seed.level - coarse_level)),
                                      coarse_level);
}

// ---------------------------------------------------------------------------
// Morphisms
// ---------------------------------------------------------------------------

const Mat& Morphism::at(int m) const {
  if (m < 1 || m > static_cast<int>(maps.size())) raise(Errc::OutOfRange, "morphism slice index");
  return maps[static_cast<std::size_t>(m - 1)];
}

MorphismReport check_morphism(const Morphism& m, double tol) {
  MorphismReport rep;
  const GridSystem& src = *m.source;
  const GridSystem& tgt = *m.target;
  if (src.level() != tgt.level()) raise(Errc::LevelMismatch, "morphism across levels");
  int n = src.cells();
  for (int mm = 1; mm <= n; ++mm) {
    if (m.at(mm).cols() != src.dim(mm) || m.at(mm).rows() != tgt.dim(mm))
      raise(Errc::DimMismatch, "morphism slice shape");
    rep.norm = std::max(rep.norm, operator_norm(m.at(mm)));
  }
  for (int i = 1; i < n; ++i)
    for (int j = 1; i + j <= n; ++j) {
      Mat lhs = tgt.beta(i, j).apply_cols(m.at(i + j));
      Mat prod = tensor_op(m.at(i), m.at(j));
      Mat rhs = BetaOp::dense(std::move(prod)).compose(src.beta(i, j)).dense_matrix();
      rep.intertwining_defect = std::max(rep.intertwining_defect, operator_norm(lhs - rhs));
    }
  rep.contractive_ok = rep.norm <= 1.0 + tol;
  rep.passed = rep.intertwining_defect <= tol && (!m.contractive || rep.contractive_ok);
  return rep;
}

// ---------------------------------------------------------------------------
// Tensor products and the flip
// ---------------------------------------------------------------------------

GridSystem tensor_systems(const GridSystem& e, const GridSystem& f) {
  if (e.level() != f.level()) raise(Errc::LevelMismatch, "tensor of systems at different levels");
  int n = e.cells();
  std::vector<Eigen::Index> dims;
  for (int m = 1; m <= n; ++m) dims.push_back(e.dim(m) * f.dim(m));
  std::map<std::pair<int, int>, BetaOp> betas;
  for (int i = 1; i < n; ++i)
    for (int j = 1; i + j <= n; ++j) {
      BetaOp inner = e.beta(i, j).tensor(f.beta(i, j));
      BetaOp swap = leg_permutation({e.dim(i), e.dim(j), f.dim(i), f.dim(j)}, {0, 2, 1, 3});
      betas[{i, j}] = swap.compose(inner);
    }
  SystemKind kind = (e.kind() == SystemKind::Product && f.kind() == SystemKind::Product)
                        ? SystemKind::Product
                        : SystemKind::Inclusion;
  return GridSystem::stored(e.level(), std::move(dims), std::move(betas), kind);
}

BetaOp flip_unitary(const GridSystem& prod, const DyadicTime& big_t, const DyadicTime& t) {
  int mt = static_cast<int>(t.units_at(prod.level()));
  int mT = static_cast<int>(big_t.units_at(prod.level()));
  if (mt <= 0 || mt >= mT || mT > prod.cells())
    raise(Errc::OutOfRange, "flip requires 0 < t < T within the grid");
  BetaOp split = prod.beta(mT - mt, mt);
  BetaOp swap = leg_permutation({prod.dim(mT - mt), prod.dim(mt)}, {1, 0});
  BetaOp join = prod.beta(mt, mT - mt).adjoint();
  return join.compose(swap.compose(split));
}

}  // namespace prodsys

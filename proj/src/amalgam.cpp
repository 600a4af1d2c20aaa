#include "prodsys/amalgam.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace prodsys {

namespace {

Mat kron_power(const Mat& a, int m) {
  Mat out = a;
  for (int i = 1; i < m; ++i) out = tensor_op(out, a);
  return out;
}

Mat hcat(const Mat& a, const Mat& b) {
  Mat out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

void require_normalized_unit(const VectorFamily& u, double tol) {
  UnitReport rep = check_unit(u, tol);
  if (!rep.passed) raise(Errc::NotAUnit, "family fails the unit factorization");
  if (!rep.normalized) raise(Errc::NotNormalized, "a normalized unit is required");
}

}  // namespace

// ---------------------------------------------------------------------------
// Amalgamation
// ---------------------------------------------------------------------------

Amalgam amalgamate(const GridSystem& e, const GridSystem& f, const std::vector<Mat>& c_maps,
                   double tol) {
  if (e.level() != f.level()) raise(Errc::LevelMismatch, "amalgam across levels");
  if (e.kind() != SystemKind::Product || f.kind() != SystemKind::Product)
    raise(Errc::NotProduct, "amalgamation is stated for product systems");

  Morphism c{&f, &e, c_maps, true};
  MorphismReport crep = check_morphism(c, tol);
  if (crep.intertwining_defect > tol) raise(Errc::NotMorphism, "C fails the intertwining law");
  if (!crep.contractive_ok) raise(Errc::NotContractive, "C has norm above 1");

  Eigen::Index de = e.dim(1), df = f.dim(1);
  Mat gram = Mat::Identity(de + df, de + df);
  gram.block(0, de, de, df) = c_maps[0];
  gram.block(de, 0, df, de) = c_maps[0].adjoint();
  GramQuotient gq = gram_kernel(gram, tol);

  Amalgam am;
  am.g = GridSystem::pure_tensor(e.level(), gq.rank, SystemKind::Product);
  am.i_cell = gq.q.leftCols(de);
  am.j_cell = gq.q.rightCols(df);
  am.c_maps = c_maps;
  for (int m = 1; m <= e.cells(); ++m) {
    Mat ip = kron_power(am.i_cell, m);
    Mat jp = kron_power(am.j_cell, m);
    am.i_maps.push_back(BetaOp::dense(std::move(ip)).compose(e.to_finest(m)).dense_matrix());
    am.j_maps.push_back(BetaOp::dense(std::move(jp)).compose(f.to_finest(m)).dense_matrix());
  }
  return am;
}

AmalgamReport amalgam_check(const Amalgam& am, const GridSystem& e, const GridSystem& f,
                            double tol) {
  AmalgamReport rep;
  for (int m = 1; m <= e.cells(); ++m) {
    Mat cross = am.embed_left(m).adjoint() * am.embed_right(m);
    rep.cross_defect =
        std::max(rep.cross_defect, operator_norm(cross - am.c_maps[static_cast<std::size_t>(m - 1)]));
  }

  Eigen::Index r = am.g.dim(1);
  Subspace cell_span = orthonormalize(hcat(am.i_cell, am.j_cell), r);
  rep.generation_defect = projector_distance(cell_span, Subspace{r, Mat::Identity(r, r)});
  if (e.cells() >= 2) {
    Mat words = hcat(hcat(tensor_op(am.i_cell, am.i_cell), tensor_op(am.i_cell, am.j_cell)),
                     hcat(tensor_op(am.j_cell, am.i_cell), tensor_op(am.j_cell, am.j_cell)));
    Subspace word_span = orthonormalize(words, r * r);
    rep.generation_defect = std::max(
        rep.generation_defect,
        projector_distance(word_span, Subspace{r * r, Mat::Identity(r * r, r * r)}));
  }

  Morphism mi{&e, &am.g, am.i_maps, false};
  Morphism mj{&f, &am.g, am.j_maps, false};
  MorphismReport ri = check_morphism(mi, tol);
  MorphismReport rj = check_morphism(mj, tol);
  rep.embedding_defect = std::max(ri.intertwining_defect, rj.intertwining_defect);
  for (int m = 1; m <= e.cells(); ++m) {
    Mat gi = am.embed_left(m).adjoint() * am.embed_left(m);
    Mat gj = am.embed_right(m).adjoint() * am.embed_right(m);
    rep.embedding_defect = std::max(
        rep.embedding_defect, operator_norm(gi - Mat::Identity(gi.rows(), gi.cols())));
    rep.embedding_defect = std::max(
        rep.embedding_defect, operator_norm(gj - Mat::Identity(gj.rows(), gj.cols())));
  }
  rep.passed = rep.cross_defect <= tol && rep.generation_defect <= tol &&
               rep.embedding_defect <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Spatial product
// ---------------------------------------------------------------------------

SpatialProduct spatial_product(const GridSystem& e, const VectorFamily& u, const GridSystem& f,
                               const VectorFamily& v, double tol) {
  require_normalized_unit(u, tol);
  require_normalized_unit(v, tol);

  std::vector<Mat> c_maps;
  for (int m = 1; m <= e.cells(); ++m) c_maps.push_back(u.at(m) * v.at(m).adjoint());

  SpatialProduct sp;
  sp.am = amalgamate(e, f, c_maps, tol);
  sp.tensor = std::make_shared<const GridSystem>(tensor_systems(e, f));

  SubsystemFamily seed;
  seed.parent = sp.tensor.get();
  seed.level = e.level();
  for (int m = 1; m <= e.cells(); ++m) {
    Mat left = tensor_op(Mat::Identity(e.dim(m), e.dim(m)), Mat(v.at(m)));
    Mat right = tensor_op(Mat(u.at(m)), Mat::Identity(f.dim(m), f.dim(m)));
    seed.spaces.push_back(orthonormalize(hcat(left, right), e.dim(m) * f.dim(m)));
  }
  sp.join = generated_subsystem(*sp.tensor, seed, std::max(tol, 1e-9));

  // Cell-level identification: generators on both sides share one Gram, so
  // the map matching them is unitary.
  Eigen::Index de = e.dim(1), df = f.dim(1);
  Mat gens_g = hcat(sp.am.i_cell, sp.am.j_cell);  // r x (de+df)
  Mat left = tensor_op(Mat::Identity(de, de), Mat(v.at(1)));
  Mat right = tensor_op(Mat(u.at(1)), Mat::Identity(df, df));
  Mat gens_k = sp.join.at(1).basis.adjoint() * hcat(left, right);

  Eigen::JacobiSVD<Mat> svd(gens_g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  Mat pinv = Mat::Zero(gens_g.cols(), gens_g.rows());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-12 * sv[0])
      pinv += (1.0 / sv[i]) * svd.matrixV().col(i) * svd.matrixU().col(i).adjoint();
  sp.cell_identification = gens_k * pinv;

  Mat t = sp.cell_identification;
  sp.identification_defect = operator_norm(t * gens_g - gens_k);
  sp.identification_defect = std::max(
      sp.identification_defect,
      operator_norm(Mat(t.adjoint() * t) - Mat::Identity(t.cols(), t.cols())));
  if (e.cells() >= 2) {
    // sampled two-letter words through the slice identification T (x) T
    Mat wg = tensor_op(gens_g, gens_g);
    Mat wk_raw = tensor_op(hcat(left, right), hcat(left, right));
    BetaOp b2 = sp.tensor->beta(1, 1);
    Mat wk = sp.join.at(2).basis.adjoint() * b2.apply_adjoint_cols(wk_raw);
    sp.identification_defect =
        std::max(sp.identification_defect, operator_norm(tensor_op(t, t) * wg - wk));
  }

  for (int m = 1; m <= e.cells(); ++m) {
    Vec lhs = sp.am.embed_left(m) * u.at(m);
    Vec rhs = sp.am.embed_right(m) * v.at(m);
    sp.common_unit_defect = std::max(sp.common_unit_defect, (lhs - rhs).norm());
  }
  return sp;
}

TypeIGenerationReport typeI_generation_check(const GridSystem& e, const VectorFamily& u,
                                             const GridSystem& f, const VectorFamily& v,
                                             double tol) {
  require_normalized_unit(u, tol);
  require_normalized_unit(v, tol);
  GridSystem tensor = tensor_systems(e, f);

  VectorFamily w;
  w.sys = &tensor;
  for (int m = 1; m <= e.cells(); ++m) w.values.push_back(prodsys::tensor(u.at(m), v.at(m)));

  SubsystemFamily ei = type_I_part(e, u, tol);
  SubsystemFamily fi = type_I_part(f, v, tol);
  SubsystemFamily ti = type_I_part(tensor, w, tol);

  auto seeded = [&](auto&& cols_for_m) {
    SubsystemFamily seed;
    seed.parent = &tensor;
    seed.level = e.level();
    for (int m = 1; m <= e.cells(); ++m)
      seed.spaces.push_back(orthonormalize(cols_for_m(m), e.dim(m) * f.dim(m)));
    return generated_subsystem(tensor, seed, std::max(tol, 1e-9));
  };

  SubsystemFamily spatial_join = seeded([&](int m) {
    return hcat(tensor_op(Mat::Identity(e.dim(m), e.dim(m)), Mat(v.at(m))),
                tensor_op(Mat(u.at(m)), Mat::Identity(f.dim(m), f.dim(m))));
  });
  SubsystemFamily typeI_join = seeded([&](int m) {
    return hcat(tensor_op(Mat::Identity(e.dim(m), e.dim(m)), fi.at(m).basis),
                tensor_op(ei.at(m).basis, Mat::Identity(f.dim(m), f.dim(m))));
  });
  SubsystemFamily corollary_join = seeded([&](int m) {
    return hcat(tensor_op(ei.at(m).basis, Mat(v.at(m))),
                tensor_op(Mat(u.at(m)), fi.at(m).basis));
  });
  SubsystemFamily mid = seeded([&](int m) { return tensor_op(ei.at(m).basis, fi.at(m).basis); });

  TypeIGenerationReport rep;
  for (int m = 1; m <= e.cells(); ++m) {
    rep.spatial_vs_typeI_join = std::max(
        rep.spatial_vs_typeI_join, projector_distance(spatial_join.at(m), typeI_join.at(m)));
    rep.corollary_join_vs_mid =
        std::max(rep.corollary_join_vs_mid, projector_distance(corollary_join.at(m), mid.at(m)));
    rep.mid_vs_tensor_typeI =
        std::max(rep.mid_vs_tensor_typeI, projector_distance(mid.at(m), ti.at(m)));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Root spaces under amalgamation
// ---------------------------------------------------------------------------

HilbertAmalgam hilbert_amalgam(const Mat& cross, double tol) {
  HilbertAmalgam ha;
  ha.dim_left = cross.rows();
  ha.dim_right = cross.cols();
  ha.cross = cross;
  Mat gram = Mat::Identity(cross.rows() + cross.cols(), cross.rows() + cross.cols());
  gram.block(0, cross.rows(), cross.rows(), cross.cols()) = cross;
  gram.block(cross.rows(), 0, cross.cols(), cross.rows()) = cross.adjoint();
  ha.quotient = gram_kernel(gram, tol);
  return ha;
}

RootAmalgamReport root_amalgam_check(const GridSystem& e, const GridSystem& f,
                                     const std::vector<Mat>& c_maps, const VectorFamily& v,
                                     double tol) {
  require_normalized_unit(v, tol);
  for (std::size_t i = 0; i < c_maps.size(); ++i) {
    const Mat& c = c_maps[i];
    if (operator_norm(c * c.adjoint() * c - c) > tol)
      raise(Errc::NotPartialIsometry, "C is not a morphism of partial isometries");
  }
  for (int m = 1; m <= f.cells(); ++m) {
    const Mat& c = c_maps[static_cast<std::size_t>(m - 1)];
    if ((c.adjoint() * (c * v.at(m)) - v.at(m)).norm() > tol)
      raise(Errc::UnitNotSupported, "v is not supported by the initial space of C");
  }

  Amalgam am = amalgamate(e, f, c_maps, tol);

  VectorFamily cv;
  cv.sys = &e;
  for (int m = 1; m <= e.cells(); ++m)
    cv.values.push_back(c_maps[static_cast<std::size_t>(m - 1)] * v.at(m));

  VectorFamily sigma;
  sigma.sys = &am.g;
  for (int m = 1; m <= e.cells(); ++m) sigma.values.push_back(am.embed_left(m) * cv.at(m));

  RootAmalgamReport rep;
  for (int m = 1; m <= e.cells(); ++m) {
    Vec rhs = am.embed_right(m) * v.at(m);
    rep.common_unit_defect = std::max(rep.common_unit_defect, (sigma.at(m) - rhs).norm());
  }

  RootSpace rg = root_space(am.g, sigma, tol);
  RootSpace re = root_space(e, cv, tol);
  RootSpace rf = root_space(f, v, tol);
  rep.amalgam_root_dim = rg.dimension();

  int top = e.cells();
  const Mat& c_top = c_maps[static_cast<std::size_t>(top - 1)];
  Mat cross(re.dimension(), rf.dimension());
  for (Eigen::Index i = 0; i < re.dimension(); ++i)
    for (Eigen::Index j = 0; j < rf.dimension(); ++j)
      cross(i, j) = re.basis_at_1.col(i).dot(c_top * rf.basis_at_1.col(j));
  HilbertAmalgam ha = hilbert_amalgam(cross, tol);
  rep.hilbert_amalgam_rank = ha.dimension();

  Mat embedded = hcat(am.embed_left(top) * re.basis_at_1, am.embed_right(top) * rf.basis_at_1);
  Subspace emb_span = orthonormalize(embedded, am.g.dim(top));
  Subspace root_span = orthonormalize(rg.basis_at_1, am.g.dim(top));
  rep.span_defect = projector_distance(emb_span, root_span);

  for (Eigen::Index i = 0; i < re.dimension(); ++i)
    for (Eigen::Index j = 0; j < rf.dimension(); ++j) {
      Cplx lhs = Vec(am.embed_left(top) * re.basis_at_1.col(i))
                     .dot(Vec(am.embed_right(top) * rf.basis_at_1.col(j)));
      rep.gram_defect = std::max(rep.gram_defect, std::abs(lhs - cross(i, j)));
    }

  for (int m = 1; m <= e.cells(); ++m) {
    Mat pe = am.embed_left(m) * am.embed_left(m).adjoint();
    Mat pf = am.embed_right(m) * am.embed_right(m).adjoint();
    rep.projector_commutation =
        std::max(rep.projector_commutation, operator_norm(pe * pf - pf * pe));
    Mat meet = pe * pf;
    rep.projector_commutation =
        std::max(rep.projector_commutation, operator_norm(meet * meet - meet));
  }

  rep.passed = rep.amalgam_root_dim == rep.hilbert_amalgam_rank && rep.span_defect <= tol &&
               rep.gram_defect <= tol && rep.projector_commutation <= tol &&
               rep.common_unit_defect <= tol;
  return rep;
}

TensorRootReport tensor_root_check(const GridSystem& e, const VectorFamily& u,
                                   const GridSystem& f, const VectorFamily& v, double tol) {
  require_normalized_unit(u, tol);
  require_normalized_unit(v, tol);
  GridSystem tensor = tensor_systems(e, f);

  VectorFamily w;
  w.sys = &tensor;
  for (int m = 1; m <= e.cells(); ++m) w.values.push_back(prodsys::tensor(u.at(m), v.at(m)));

  RootSpace rt = root_space(tensor, w, tol);
  RootSpace re = root_space(e, u, tol);
  RootSpace rf = root_space(f, v, tol);

  TensorRootReport rep;
  rep.root_dim = rt.dimension();

  int top = e.cells();
  std::vector<Vec> block_tops;
  for (Eigen::Index i = 0; i < re.dimension(); ++i) {
    AdditiveFamily a = root_family(re, i);
    AdditiveFamily d = additive_from_cell(w, prodsys::tensor(a.at(1), v.at(1)));
    AdditiveReport drep = check_additive(d, tol);
    rep.constructed_additivity = std::max(rep.constructed_additivity, drep.additivity_defect);
    block_tops.push_back(d.top());
  }
  std::size_t left_count = block_tops.size();
  for (Eigen::Index j = 0; j < rf.dimension(); ++j) {
    AdditiveFamily b = root_family(rf, j);
    AdditiveFamily d = additive_from_cell(w, prodsys::tensor(u.at(1), b.at(1)));
    AdditiveReport drep = check_additive(d, tol);
    rep.constructed_additivity = std::max(rep.constructed_additivity, drep.additivity_defect);
    block_tops.push_back(d.top());
  }

  for (std::size_t i = 0; i < left_count; ++i)
    for (std::size_t j = left_count; j < block_tops.size(); ++j)
      rep.cross_gram = std::max(rep.cross_gram, std::abs(block_tops[i].dot(block_tops[j])));

  Subspace blocks = orthonormalize(block_tops, tensor.dim(top));
  rep.block_dim = blocks.rank();
  Subspace roots_top = orthonormalize(rt.basis_at_1, tensor.dim(top));
  rep.decomposition_residual = containment_defect(roots_top, blocks);
  return rep;
}

// ---------------------------------------------------------------------------
// CP maps and the Powers sum
// ---------------------------------------------------------------------------

CPMap::CPMap(Eigen::Index in_dim, Eigen::Index out_dim, Mat choi)
    : in_(in_dim), out_(out_dim), choi_(std::move(choi)) {
  if (choi_.rows() != in_ * out_ || choi_.cols() != in_ * out_)
    raise(Errc::ShapeMismatch, "Choi matrix shape");
}

CPMap CPMap::identity(Eigen::Index n) { return ad(Mat::Identity(n, n)); }

CPMap CPMap::from_kraus(Eigen::Index in_dim, Eigen::Index out_dim,
                        const std::vector<Mat>& kraus) {
  Mat choi = Mat::Zero(in_dim * out_dim, in_dim * out_dim);
  for (const Mat& k : kraus) {
    if (k.rows() != out_dim || k.cols() != in_dim) raise(Errc::ShapeMismatch, "Kraus shape");
    for (Eigen::Index i = 0; i < in_dim; ++i)
      for (Eigen::Index j = 0; j < in_dim; ++j)
        choi.block(i * out_dim, j * out_dim, out_dim, out_dim) +=
            k.col(i) * k.col(j).adjoint();
  }
  return CPMap(in_dim, out_dim, std::move(choi));
}

CPMap CPMap::ad(const Mat& u) { return from_kraus(u.cols(), u.rows(), {u}); }

Mat CPMap::apply(const Mat& x) const {
  if (x.rows() != in_ || x.cols() != in_) raise(Errc::ShapeMismatch, "CPMap::apply");
  Mat out = Mat::Zero(out_, out_);
  for (Eigen::Index i = 0; i < in_; ++i)
    for (Eigen::Index j = 0; j < in_; ++j)
      out += x(i, j) * choi_.block(i * out_, j * out_, out_, out_);
  return out;
}

CPMap CPMap::compose(const CPMap& inner) const {
  if (in_ != inner.out_) raise(Errc::ShapeMismatch, "CPMap::compose");
  Mat choi = Mat::Zero(inner.in_ * out_, inner.in_ * out_);
  for (Eigen::Index i = 0; i < inner.in_; ++i)
    for (Eigen::Index j = 0; j < inner.in_; ++j) {
      Mat mid = inner.choi_.block(i * inner.out_, j * inner.out_, inner.out_, inner.out_);
      choi.block(i * out_, j * out_, out_, out_) = apply(mid);
    }
  return CPMap(inner.in_, out_, std::move(choi));
}

double CPMap::choi_min_eigenvalue() const { return min_hermitian_eigenvalue(choi_); }

double CPMap::unitality_defect() const {
  Mat img = apply(Mat::Identity(in_, in_));
  return operator_norm(img - Mat::Identity(out_, out_));
}

double CPMap::distance(const CPMap& a, const CPMap& b) {
  if (a.in_ != b.in_ || a.out_ != b.out_) raise(Errc::ShapeMismatch, "CPMap::distance");
  return operator_norm(a.choi_ - b.choi_);
}

CPMap powers_sum(const CPMap& phi, const CPMap& psi, const Mat& u, const Mat& v) {
  Eigen::Index n = phi.in_dim(), m = psi.in_dim();
  if (phi.out_dim() != n || psi.out_dim() != m) raise(Errc::ShapeMismatch, "summands must be endomorphisms");
  if (u.rows() != n || u.cols() != n || v.rows() != m || v.cols() != m)
    raise(Errc::ShapeMismatch, "intertwiner shapes");
  Eigen::Index d = n + m;
  Mat choi = Mat::Zero(d * d, d * d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      Mat img = Mat::Zero(d, d);
      if (a < n && b < n) {
        Mat x = Mat::Zero(n, n);
        x(a, b) = 1.0;
        img.topLeftCorner(n, n) = phi.apply(x);
      } else if (a < n && b >= n) {
        Mat y = Mat::Zero(n, m);
        y(a, b - n) = 1.0;
        img.topRightCorner(n, m) = u * y * v.adjoint();
      } else if (a >= n && b < n) {
        Mat z = Mat::Zero(m, n);
        z(a - n, b) = 1.0;
        img.bottomLeftCorner(m, n) = v * z * u.adjoint();
      } else {
        Mat wmat = Mat::Zero(m, m);
        wmat(a - n, b - n) = 1.0;
        img.bottomRightCorner(m, m) = psi.apply(wmat);
      }
      choi.block(a * d, b * d, d, d) = img;
    }
  return CPMap(d, d, std::move(choi));
}

double intertwining_defect(const CPMap& phi, const Mat& u) {
  Eigen::Index n = phi.in_dim();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      Mat a = Mat::Zero(n, n);
      a(i, j) = 1.0;
      worst = std::max(worst, operator_norm(phi.apply(a) * u - u * a));
    }
  return worst;
}

nlohmann::json cpmap_to_json(const CPMap& m) {
  return nlohmann::json{
      {"in_dim", m.in_dim()}, {"out_dim", m.out_dim()}, {"choi", mat_to_json(m.choi())}};
}

CPMap cpmap_from_json(const nlohmann::json& j) {
  return CPMap(j.at("in_dim").get<Eigen::Index>(), j.at("out_dim").get<Eigen::Index>(),
               mat_from_json(j.at("choi")));
}

CpReport cp_checks(const std::vector<CPMap>& family, double tol) {
  if (family.empty()) raise(Errc::BadInput, "cp_checks needs at least one step");
  CpReport rep;
  rep.choi_min_eigenvalue = family[0].choi_min_eigenvalue();
  rep.unitality_defect = family[0].unitality_defect();
  rep.cp = rep.choi_min_eigenvalue >= -tol;
  rep.unital = rep.unitality_defect <= tol;
  CPMap acc = family[0];
  for (std::size_t i = 1; i < family.size(); ++i) {
    acc = family[0].compose(acc);
    rep.semigroup_defect = std::max(rep.semigroup_defect, CPMap::distance(acc, family[i]));
  }
  rep.passed = rep.cp && rep.semigroup_defect <= tol;
  return rep;
}

}  // namespace prodsys

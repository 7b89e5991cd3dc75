#include "cmcdisk/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace cmcdisk {

namespace {

Mat3 cross_matrix(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

struct FrameLayout {
  std::vector<int> offset;
  std::vector<int> count;
  std::vector<Eigen::Matrix<double, 3, 2>> frames;
  int dofs = 0;
};

FrameLayout boundary_frames(const SurfaceMap& u, const ImplicitSurface& sigma,
                            double frame_angle) {
  const DiskMesh& m = *u.mesh;
  FrameLayout layout;
  layout.offset.resize(m.n_vertices());
  layout.count.resize(m.n_vertices());
  layout.frames.resize(m.n_vertices());
  const int nb = m.n_boundary();
  std::vector<int> loop_pos(m.n_vertices(), -1);
  for (int i = 0; i < nb; ++i) loop_pos[m.boundary_loop[i]] = i;
  int at = 0;
  for (int v = 0; v < m.n_vertices(); ++v) {
    layout.offset[v] = at;
    if (!m.is_boundary[v]) {
      layout.count[v] = 3;
      at += 3;
      continue;
    }
    layout.count[v] = 2;
    const Vec3 eta = sigma.inward_normal(u.pos[v]);
    // Gram-Schmidt of the two boundary-edge image directions against eta
    const int bp = loop_pos[v];
    const Vec3 e1 = u.pos[m.boundary_loop[(bp + 1) % nb]] - u.pos[v];
    const Vec3 e2 = u.pos[m.boundary_loop[(bp + nb - 1) % nb]] - u.pos[v];
    Vec3 t1 = e1 - e1.dot(eta) * eta;
    if (t1.norm() < 1e-12) t1 = e2 - e2.dot(eta) * eta;
    if (t1.norm() < 1e-12) {
      // degenerate images (e.g. near-constant map): any frame of the plane
      const Vec3 seed = std::abs(eta.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
      t1 = seed - seed.dot(eta) * eta;
    }
    t1.normalize();
    Vec3 t2 = eta.cross(t1);
    if (frame_angle != 0.0) {
      const Vec3 r1 = std::cos(frame_angle) * t1 + std::sin(frame_angle) * t2;
      const Vec3 r2 = -std::sin(frame_angle) * t1 + std::cos(frame_angle) * t2;
      t1 = r1;
      t2 = r2;
    }
    layout.frames[v].col(0) = t1;
    layout.frames[v].col(1) = t2;
    at += 2;
  }
  layout.dofs = at;
  return layout;
}

using TripletList = std::vector<Eigen::Triplet<double>>;

// scatter a full 3x3 vertex block into reduced dofs
void scatter_block(TripletList& trips, const FrameLayout& L, int va, int vb, const Mat3& block) {
  const int oa = L.offset[va], ob = L.offset[vb];
  if (L.count[va] == 3 && L.count[vb] == 3) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        if (block(r, c) != 0.0) trips.emplace_back(oa + r, ob + c, block(r, c));
  } else if (L.count[va] == 3) {
    const Eigen::Matrix<double, 3, 2> red = block * L.frames[vb];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 2; ++c) trips.emplace_back(oa + r, ob + c, red(r, c));
  } else if (L.count[vb] == 3) {
    const Eigen::Matrix<double, 2, 3> red = L.frames[va].transpose() * block;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) trips.emplace_back(oa + r, ob + c, red(r, c));
  } else {
    const Mat2 red = L.frames[va].transpose() * block * L.frames[vb];
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) trips.emplace_back(oa + r, ob + c, red(r, c));
  }
}

HessianSystem assemble_vector_form(const SurfaceMap& u, const EnergyParams& params,
                                   double frame_angle) {
  const DiskMesh& m = *u.mesh;
  const double ef = params.eps == 0.0 ? 0.0 : std::pow(params.eps, params.p - 2.0);
  const auto grads = gradient(m, u.pos);
  const FrameLayout layout = boundary_frames(u, params.sigma, frame_angle);

  TripletList trips;
  trips.reserve(90 * m.n_triangles());
  std::vector<Vec3> force(m.n_vertices(), Vec3::Zero());  // nodal energy gradient
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const Grad3& G = grads[t];
    const double s = G.squaredNorm();
    const double c1 = 1.0 + ef * std::pow(1.0 + s, 0.5 * params.p - 1.0);
    const double c2 = ef * (params.p - 2.0) * std::pow(1.0 + s, 0.5 * params.p - 2.0);
    const Vec3 ux = G.col(0), uy = G.col(1);
    const Vec3 ncross = ux.cross(uy);
    const Vec3 centroid = (u.pos[tri[0]] + u.pos[tri[1]] + u.pos[tri[2]]) / 3.0;
    const double fval = params.f.value(centroid);
    const Vec3 gf = params.f.grad(centroid);
    const double A = m.tri_area[t];

    const Mat2& Jinv = m.tri_jacobian_inv[t];
    const Vec2 gl1(Jinv(0, 0), Jinv(0, 1));
    const Vec2 gl2(Jinv(1, 0), Jinv(1, 1));
    const std::array<Vec2, 3> gl{-gl1 - gl2, gl1, gl2};
    std::array<Vec3, 3> w;  // <grad u, grad psi> = sum_a w_a . psi_a
    for (int a = 0; a < 3; ++a) w[a] = G * gl[a];
    for (int a = 0; a < 3; ++a)
      force[tri[a]] += A * (c1 * w[a] + (fval / 3.0) * ncross);

    // f(u) <psibar, psi_x x u_y + u_x x psi_y> , unsymmetrized blocks
    // B(a,b) = (1/3) [ -gl_b.x [u_y]x + gl_b.y [u_x]x ]
    const Mat3 cy = cross_matrix(uy), cx = cross_matrix(ux);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        Mat3 block = (c1 * A * gl[a].dot(gl[b])) * Mat3::Identity();
        block += (c2 * A) * (w[a] * w[b].transpose());
        block += (A / 18.0) * (gf * ncross.transpose() + ncross * gf.transpose());
        const Mat3 vol_ab = (fval * A / 3.0) * (-gl[b].x() * cy + gl[b].y() * cx);
        const Mat3 vol_ba = (fval * A / 3.0) * (-gl[a].x() * cy + gl[a].y() * cx);
        block += 0.5 * (vol_ab + vol_ba.transpose());
        scatter_block(trips, layout, tri[a], tri[b], block);
      }
    }
  }

  // boundary curvature term: the constraint enters through the retraction,
  // so the exact Hessian of the discrete energy along the closest-point
  // retraction weights hess(phi) with the discrete normal boundary force.
  // This is the vertex-rule quadrature of the A_Sigma^{u_r} boundary
  // integral, with the [1 + eps^{p-2}(...)] coefficient carried by the force.
  for (int v : m.boundary_loop) {
    const Vec3 gphi = params.sigma.grad(u.pos[v]);
    const double gn = gphi.norm();
    const Vec3 eta = -gphi / gn;
    const double wn = force[v].dot(eta) / gn;
    const Mat3 W = wn * params.sigma.hess(u.pos[v]);
    scatter_block(trips, layout, v, v, W);
  }

  HessianSystem sys;
  sys.mesh = u.mesh;
  sys.dofs = layout.dofs;
  sys.dof_offset = layout.offset;
  sys.dof_count = layout.count;
  sys.frames = layout.frames;
  sys.A.resize(layout.dofs, layout.dofs);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.M.resize(layout.dofs);
  const auto mass = lumped_vertex_mass(m);
  for (int v = 0; v < m.n_vertices(); ++v)
    for (int d = 0; d < layout.count[v]; ++d) sys.M[layout.offset[v] + d] = mass[v];
  return sys;
}

}  // namespace

double HessianSystem::norm_estimate() const {
  Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(dofs);
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      rowsum[it.row()] += std::abs(it.value());
  return rowsum.maxCoeff();
}

HessianSystem assemble_second_variation(const SurfaceMap& u, const EnergyParams& params) {
  return assemble_vector_form(u, params, 0.0);
}

HessianSystem assemble_second_variation_rotated(const SurfaceMap& u, const EnergyParams& params,
                                                double frame_angle) {
  return assemble_vector_form(u, params, frame_angle);
}

std::vector<Vec3> embed_field(const HessianSystem& sys, const Eigen::VectorXd& reduced) {
  if (sys.scalar) throw std::invalid_argument("embed_field: scalar system");
  const DiskMesh& m = *sys.mesh;
  std::vector<Vec3> out(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v) {
    if (sys.dof_count[v] == 3) {
      out[v] = reduced.segment<3>(sys.dof_offset[v]);
    } else {
      out[v] = sys.frames[v] * reduced.segment<2>(sys.dof_offset[v]).eval();
    }
  }
  return out;
}

namespace {

struct Pencil {
  const Eigen::SparseMatrix<double>& A;
  const Eigen::VectorXd& M;
};

// simple Lanczos bounds for D^{-1/2} A D^{-1/2}
std::pair<double, double> lanczos_bounds(const Pencil& p, int steps) {
  const int n = static_cast<int>(p.M.size());
  steps = std::min(steps, n);
  const Eigen::VectorXd dinv = p.M.cwiseSqrt().cwiseInverse();
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> gauss;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = gauss(rng);
  v.normalize();
  Eigen::VectorXd vprev = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd V(n, steps);
  Eigen::VectorXd alpha(steps), beta(steps);
  double beta_prev = 0.0;
  int m = 0;
  for (int j = 0; j < steps; ++j) {
    V.col(j) = v;
    Eigen::VectorXd w = dinv.asDiagonal() * (p.A * (dinv.asDiagonal() * v));
    w -= beta_prev * vprev;
    alpha[j] = v.dot(w);
    w -= alpha[j] * v;
    w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);  // reorthogonalize
    const double b = w.norm();
    m = j + 1;
    if (b < 1e-12) break;
    beta[j] = b;
    vprev = v;
    v = w / b;
    beta_prev = b;
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

}  // namespace

SpectralReport morse_index(const HessianSystem& system, int k, double index_tol,
                           bool want_vectors, int dense_threshold) {
  const int n = system.dofs;
  if (n == 0) throw std::invalid_argument("morse_index: empty system");
  k = std::min(k, n);
  const double normA = system.norm_estimate();
  if (index_tol < 0.0) index_tol = 1e-8 * normA;

  Eigen::VectorXd lambda;
  Eigen::MatrixXd vectors;  // columns, M-orthonormal

  if (n <= dense_threshold) {
    const Eigen::VectorXd dinv = system.M.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd B = Eigen::MatrixXd(system.A);
    B = dinv.asDiagonal() * B * dinv.asDiagonal();
    B = 0.5 * (B + B.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    lambda = es.eigenvalues().head(k);
    vectors = dinv.asDiagonal() * es.eigenvectors().leftCols(k);
  } else {
    const auto [lo, hi] = lanczos_bounds({system.A, system.M}, 80);
    const double sigma = lo - 0.05 * std::max(1.0, hi - lo) - 1e-10 * normA;
    Eigen::SparseMatrix<double> shifted = system.A;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma * system.M[i];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(shifted);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("morse_index: factorization failed");

    const int block = std::min(n, k + 10);
    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd X(n, block);
    for (int j = 0; j < block; ++j)
      for (int i = 0; i < n; ++i) X(i, j) = gauss(rng);

    auto m_orthonormalize = [&](Eigen::MatrixXd& Z) {
      for (int j = 0; j < Z.cols(); ++j) {
        for (int rep = 0; rep < 2; ++rep)
          for (int i = 0; i < j; ++i)
            Z.col(j) -= (Z.col(i).dot(system.M.asDiagonal() * Z.col(j))) * Z.col(i);
        const double nn = std::sqrt(Z.col(j).dot(system.M.asDiagonal() * Z.col(j)));
        Z.col(j) /= nn;
      }
    };

    Eigen::VectorXd prev = Eigen::VectorXd::Constant(k, 1e300);
    for (int iter = 0; iter < 200; ++iter) {
      Eigen::MatrixXd Y(n, block);
      for (int j = 0; j < block; ++j)
        Y.col(j) = ldlt.solve(system.M.asDiagonal() * X.col(j));
      m_orthonormalize(Y);
      const Eigen::MatrixXd H = Y.transpose() * (system.A * Y);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
      X = Y * es.eigenvectors();
      lambda = es.eigenvalues().head(k);
      if ((lambda - prev).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, normA)) break;
      prev = lambda;
    }
    vectors = X.leftCols(k);
  }

  SpectralReport rep;
  rep.dofs = n;
  rep.index_tol = index_tol;
  rep.eigenvalues.assign(lambda.data(), lambda.data() + k);
  double worst = 0.0;
  const double scale = normA * std::max(1.0, system.M.maxCoeff());
  for (int j = 0; j < k; ++j) {
    const Eigen::VectorXd r =
        system.A * vectors.col(j) - lambda[j] * (system.M.asDiagonal() * vectors.col(j));
    worst = std::max(worst, r.norm() / (scale * vectors.col(j).norm()));
  }
  rep.max_pair_residual = worst;
  for (double l : rep.eigenvalues) {
    if (l < -index_tol) ++rep.index;
    else if (l <= index_tol) ++rep.nullity;
  }
  if (want_vectors) {
    std::vector<Eigen::VectorXd> vecs;
    for (int j = 0; j < k; ++j) vecs.push_back(vectors.col(j));
    rep.eigenvectors = std::move(vecs);
  }
  return rep;
}

NormalField normal_field(const SurfaceMap& u, double branch_tol) {
  const DiskMesh& m = *u.mesh;
  const auto grads = gradient(m, u.pos);
  NormalField nf;
  nf.n.resize(m.n_triangles());
  nf.branch_mask.assign(m.n_triangles(), 0);
  double mean = 0.0;
  std::vector<double> mag(m.n_triangles());
  for (int t = 0; t < m.n_triangles(); ++t) {
    const Vec3 c = grads[t].col(0).cross(grads[t].col(1));
    mag[t] = c.norm();
    nf.n[t] = c;
    mean += mag[t];
  }
  mean /= m.n_triangles();
  if (mean < 1e-14) throw std::invalid_argument("normal_field: map is constant");
  for (int t = 0; t < m.n_triangles(); ++t) {
    if (mag[t] < branch_tol * mean) {
      nf.branch_mask[t] = 1;
      ++nf.n_branched;
      nf.n[t].setZero();
    } else {
      nf.n[t] /= mag[t];
    }
  }
  return nf;
}

HessianSystem area_index_form(const SurfaceMap& u, double H, const ImplicitSurface& sigma,
                              double branch_tol) {
  const DiskMesh& m = *u.mesh;
  const NormalField nf = normal_field(u, branch_tol);
  if (nf.n_branched * 10 > m.n_triangles())
    throw std::runtime_error("area_index_form: more than 10% of triangles are branched");
  const auto grads = gradient(m, u.pos);

  TripletList trips;
  trips.reserve(10 * m.n_triangles());
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const double A = m.tri_area[t];
    const Mat2& Jinv = m.tri_jacobian_inv[t];
    const Vec2 gl1(Jinv(0, 0), Jinv(0, 1));
    const Vec2 gl2(Jinv(1, 0), Jinv(1, 1));
    const std::array<Vec2, 3> gl{-gl1 - gl2, gl1, gl2};
    // (|grad u|^2 / 2) * (H^2 / 2)
    const double kappa = nf.branch_mask[t] ? 0.0 : 0.25 * grads[t].squaredNorm() * H * H;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        trips.emplace_back(tri[a], tri[b], A * (gl[a].dot(gl[b]) - kappa / 9.0));
  }
  const int nb = m.n_boundary();
  for (int e = 0; e < nb; ++e) {
    const int va = m.boundary_loop[e];
    const int vb = m.boundary_loop[(e + 1) % nb];
    const int te = m.edge_tri[e];
    if (nf.branch_mask[te]) continue;
    const Vec3 umid = 0.5 * (u.pos[va] + u.pos[vb]);
    const Vec3 q = closest_point(sigma, umid);
    const Vec3 gphi = sigma.grad(q);
    const double gn = gphi.norm();
    const Vec3 eta = -gphi / gn;
    const Vec2 rmid = (0.5 * (m.vertices[va] + m.vertices[vb])).normalized();
    const Vec3 ur = grads[te] * rmid;
    const double a_e = ur.dot(eta) * nf.n[te].dot(sigma.hess(q) * nf.n[te]) / gn;
    const double quarter = 0.25 * m.edge_len[e] * a_e;
    trips.emplace_back(va, va, quarter);
    trips.emplace_back(va, vb, quarter);
    trips.emplace_back(vb, va, quarter);
    trips.emplace_back(vb, vb, quarter);
  }

  HessianSystem sys;
  sys.mesh = u.mesh;
  sys.scalar = true;
  sys.dofs = m.n_vertices();
  sys.dof_offset.resize(m.n_vertices());
  sys.dof_count.assign(m.n_vertices(), 1);
  for (int v = 0; v < m.n_vertices(); ++v) sys.dof_offset[v] = v;
  sys.A.resize(sys.dofs, sys.dofs);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  const auto mass = lumped_vertex_mass(m);
  sys.M = Eigen::Map<const Eigen::VectorXd>(mass.data(), mass.size());
  return sys;
}

double area_form_value(const HessianSystem& sys, std::span<const double> f) {
  if (!sys.scalar || f.size() != static_cast<size_t>(sys.dofs))
    throw std::invalid_argument("area_form_value: bad input");
  const Eigen::Map<const Eigen::VectorXd> x(f.data(), f.size());
  return x.dot(sys.A * x);
}

IndexComparison index_comparison_check(const SurfaceMap& u, const EnergyParams& params, int k,
                                       double index_tol) {
  EnergyParams limit = params;
  limit.eps = 0.0;
  IndexComparison cmp;
  cmp.area_report = morse_index(area_index_form(u, params.H, params.sigma), k, index_tol);
  cmp.energy_report = morse_index(assemble_second_variation(u, limit), k, index_tol);
  cmp.index_area = cmp.area_report.index;
  cmp.index_energy = cmp.energy_report.index;
  cmp.pass = cmp.index_area <= cmp.index_energy;
  return cmp;
}

HerschCheck hersch_bound_check(const SurfaceMap& u, double H, const ImplicitSurface& sigma,
                               double mesh_tol) {
  if (!(H > 0.0)) throw std::invalid_argument("hersch_bound_check: H must be positive");
  const DiskMesh& m = *u.mesh;
  const NormalField nf = normal_field(u);
  const auto grads = gradient(m, u.pos);
  const int nb = m.n_boundary();
  std::vector<double> per_edge(nb, 0.0);
  for (int e = 0; e < nb; ++e) {
    const int va = m.boundary_loop[e];
    const int vb = m.boundary_loop[(e + 1) % nb];
    const int te = m.edge_tri[e];
    if (nf.branch_mask[te]) continue;
    const Vec3 umid = 0.5 * (u.pos[va] + u.pos[vb]);
    const Vec3 q = closest_point(sigma, umid);
    const Vec3 gphi = sigma.grad(q);
    const double gn = gphi.norm();
    const Vec3 eta = -gphi / gn;
    const Vec2 rmid = (0.5 * (m.vertices[va] + m.vertices[vb])).normalized();
    const Vec3 ur = grads[te] * rmid;
    per_edge[e] = ur.dot(eta) * nf.n[te].dot(sigma.hess(q) * nf.n[te]) / gn;
  }
  HerschCheck out;
  out.boundary_integral = boundary_integrate(m, per_edge);
  out.D = dirichlet(u);
  out.bound = 16.0 * std::numbers::pi / (H * H);
  out.margin = out.bound - out.D;
  out.sharper = (16.0 * std::numbers::pi + 2.0 * out.boundary_integral) / (H * H);
  out.pass = out.D <= out.bound + mesh_tol;
  return out;
}

}  // namespace cmcdisk

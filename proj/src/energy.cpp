#include "cmcdisk/energy.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cmcdisk {

namespace {

double eps_factor(double eps, double p) {
  if (eps < 0.0) throw std::invalid_argument("eps must be nonnegative");
  if (!(p > 2.0 && p < 3.0)) throw std::invalid_argument("p must lie in (2,3)");
  return eps == 0.0 ? 0.0 : std::pow(eps, p - 2.0);
}

void check_map(const SurfaceMap& u) {
  if (!u.mesh || u.pos.size() != static_cast<size_t>(u.mesh->n_vertices()))
    throw std::invalid_argument("surface map: position count != vertex count");
}

struct Kinematics {
  std::vector<Grad3> grad;
  std::vector<Vec3> centroid;
  std::vector<Vec3> cross;  // u_x1 x u_x2
  std::vector<double> g2;   // |grad u|^2
};

Kinematics kinematics(const SurfaceMap& u) {
  check_map(u);
  const DiskMesh& m = *u.mesh;
  Kinematics k;
  k.grad = gradient(m, u.pos);
  k.centroid.resize(m.n_triangles());
  k.cross.resize(m.n_triangles());
  k.g2.resize(m.n_triangles());
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    k.centroid[t] = (u.pos[tri[0]] + u.pos[tri[1]] + u.pos[tri[2]]) / 3.0;
    k.cross[t] = k.grad[t].col(0).cross(k.grad[t].col(1));
    k.g2[t] = k.grad[t].squaredNorm();
  }
  return k;
}

}  // namespace

// ---- CurvatureField ----

CurvatureField CurvatureField::zero() { return CurvatureField{}; }

CurvatureField CurvatureField::constant(double H) {
  CurvatureField f;
  f.kind_ = Kind::constant;
  f.profile_ = PrescribedCurvature{H, 1.0};
  return f;
}

CurvatureField CurvatureField::from_barrier(const BarrierSpec& barrier) {
  CurvatureField f;
  f.kind_ = Kind::barrier;
  f.profile_ = build_f(barrier);
  f.barrier_ = std::make_shared<BarrierSpec>(barrier);
  return f;
}

CurvatureField CurvatureField::scaled(double factor) const {
  CurvatureField f = *this;
  f.scale_ *= factor;
  return f;
}

double CurvatureField::value(const Vec3& y) const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::constant: return scale_ * profile_.H;
    case Kind::barrier: return scale_ * profile_.value(offset_distance(*barrier_, y));
  }
  return 0.0;
}

Vec3 CurvatureField::grad(const Vec3& y) const {
  if (kind_ != Kind::barrier) return Vec3::Zero();
  if (barrier_->surface.phi(y) <= 0.0) return Vec3::Zero();
  const Vec3 q = closest_point(barrier_->surface, y);
  const double d = (y - q).norm();
  const double fp = profile_.derivative(d);
  if (fp == 0.0 || d < 1e-14) return Vec3::Zero();
  return (scale_ * fp / d) * (y - q);
}

EnergyParams make_params(const ImplicitSurface& sigma, const ImplicitSurface& barrier_surface,
                         double H0, double H, double eps, double p) {
  EnergyParams params;
  params.sigma = sigma;
  params.barrier = make_barrier(barrier_surface, H0, H);
  params.f = (H == 0.0) ? CurvatureField::zero() : CurvatureField::from_barrier(params.barrier);
  params.H = H;
  params.eps = eps;
  params.p = p;
  params.bead_spacing_cap = 0.05 * sigma.diameter();
  return params;
}

// ---- functionals ----

double dirichlet(const SurfaceMap& u) {
  check_map(u);
  const auto g = gradient(*u.mesh, u.pos);
  std::vector<double> density(u.mesh->n_triangles());
  for (int t = 0; t < u.mesh->n_triangles(); ++t) density[t] = 0.5 * g[t].squaredNorm();
  return integrate(*u.mesh, density);
}

double perturbed_dirichlet(const SurfaceMap& u, double eps, double p) {
  check_map(u);
  const double ef = eps_factor(eps, p);
  const auto g = gradient(*u.mesh, u.pos);
  std::vector<double> density(u.mesh->n_triangles());
  for (int t = 0; t < u.mesh->n_triangles(); ++t) {
    const double s = g[t].squaredNorm();
    density[t] = 0.5 * s + ef * std::pow(1.0 + s, 0.5 * p) / p;
  }
  return integrate(*u.mesh, density);
}

double max_bead_spacing(const HomotopyPath& path) {
  double spacing = 0.0;
  for (int b = 0; b + 1 < path.n_beads(); ++b)
    for (size_t i = 0; i < path.beads[b].size(); ++i)
      spacing = std::max(spacing, (path.beads[b + 1][i] - path.beads[b][i]).norm());
  return spacing;
}

double swept_volume(const HomotopyPath& path, const CurvatureField& f, double spacing_cap) {
  if (!path.mesh || path.n_beads() < 1) throw std::invalid_argument("swept_volume: empty path");
  if (spacing_cap > 0.0 && max_bead_spacing(path) > spacing_cap)
    throw std::invalid_argument("swept_volume: bead spacing exceeds the cap");
  const DiskMesh& m = *path.mesh;
  std::vector<double> segments(std::max(0, path.n_beads() - 1), 0.0);
  std::vector<Vec3> mid(m.n_vertices()), vel(m.n_vertices());
  for (int b = 0; b + 1 < path.n_beads(); ++b) {
    const auto& ua = path.beads[b];
    const auto& ub = path.beads[b + 1];
    for (int i = 0; i < m.n_vertices(); ++i) {
      mid[i] = 0.5 * (ua[i] + ub[i]);
      vel[i] = ub[i] - ua[i];
    }
    const auto g = gradient(m, mid);
    std::vector<double> density(m.n_triangles());
    for (int t = 0; t < m.n_triangles(); ++t) {
      const auto& tri = m.triangles[t];
      const Vec3 c = (mid[tri[0]] + mid[tri[1]] + mid[tri[2]]) / 3.0;
      const Vec3 v = (vel[tri[0]] + vel[tri[1]] + vel[tri[2]]) / 3.0;
      density[t] = f.value(c) * v.dot(g[t].col(0).cross(g[t].col(1)));
    }
    segments[b] = integrate(m, density);
  }
  return pairwise_sum(segments);
}

double total_energy(const SurfaceMap& u, const HomotopyPath& path, const EnergyParams& params) {
  check_map(u);
  if (path.mesh != u.mesh) throw std::invalid_argument("total_energy: path and map share no mesh");
  const auto& last = path.beads.back();
  for (int i = 0; i < u.mesh->n_vertices(); ++i)
    if ((last[i] - u.pos[i]).norm() > 1e-12)
      throw std::invalid_argument("total_energy: path does not end at u");
  return perturbed_dirichlet(u, params.eps, params.p) +
         swept_volume(path, params.f, params.bead_spacing_cap);
}

double first_variation(const SurfaceMap& u, std::span<const Vec3> psi, const EnergyParams& params) {
  check_map(u);
  const DiskMesh& m = *u.mesh;
  if (psi.size() != static_cast<size_t>(m.n_vertices()))
    throw std::invalid_argument("first_variation: psi length != vertex count");
  for (int bi : m.boundary_loop) {
    const Vec3 eta = params.sigma.inward_normal(u.pos[bi]);
    if (std::abs(psi[bi].dot(eta)) > 1e-8 * (1.0 + psi[bi].norm()))
      throw std::invalid_argument("first_variation: psi not tangent at a boundary vertex");
  }
  const double ef = eps_factor(params.eps, params.p);
  const auto k = kinematics(u);
  const auto gpsi = gradient(m, psi);
  std::vector<double> density(m.n_triangles());
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const double coef = 1.0 + ef * std::pow(1.0 + k.g2[t], 0.5 * params.p - 1.0);
    const Vec3 psibar = (psi[tri[0]] + psi[tri[1]] + psi[tri[2]]) / 3.0;
    density[t] = coef * (k.grad[t].array() * gpsi[t].array()).sum() +
                 params.f.value(k.centroid[t]) * psibar.dot(k.cross[t]);
  }
  return integrate(m, density);
}

Residual residual(const SurfaceMap& u, const EnergyParams& params) {
  check_map(u);
  const DiskMesh& m = *u.mesh;
  const double ef = eps_factor(params.eps, params.p);
  const auto k = kinematics(u);

  Residual r;
  r.force.assign(m.n_vertices(), Vec3::Zero());
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const double coef = 1.0 + ef * std::pow(1.0 + k.g2[t], 0.5 * params.p - 1.0);
    const double fval = params.f.value(k.centroid[t]);
    const Mat2& Jinv = m.tri_jacobian_inv[t];
    // gradients of the barycentric basis: rows of Jinv for vertices 1,2
    const Vec2 gl1(Jinv(0, 0), Jinv(0, 1));
    const Vec2 gl2(Jinv(1, 0), Jinv(1, 1));
    const Vec2 gl0 = -gl1 - gl2;
    const std::array<Vec2, 3> gl{gl0, gl1, gl2};
    for (int a = 0; a < 3; ++a) {
      r.force[tri[a]] += m.tri_area[t] * (coef * (k.grad[t] * gl[a]) + (fval / 3.0) * k.cross[t]);
    }
  }

  r.mass = lumped_vertex_mass(m);
  r.riesz.resize(m.n_vertices());
  for (int i = 0; i < m.n_vertices(); ++i) {
    Vec3 f = r.force[i];
    if (m.is_boundary[i]) {
      const Vec3 eta = params.sigma.inward_normal(u.pos[i]);
      f -= f.dot(eta) * eta;
      r.force[i] = f;
    }
    r.riesz[i] = f / r.mass[i];
  }
  std::vector<double> terms(m.n_vertices());
  for (int i = 0; i < m.n_vertices(); ++i) terms[i] = r.mass[i] * r.riesz[i].squaredNorm();
  r.norm = std::sqrt(pairwise_sum(terms));

  const auto ur = boundary_radial_derivative(u);
  double defect = 0.0;
  for (int bi = 0; bi < m.n_boundary(); ++bi) {
    const int v = m.boundary_loop[bi];
    const Vec3 eta = params.sigma.inward_normal(u.pos[v]);
    defect = std::max(defect, (ur[bi] - ur[bi].dot(eta) * eta).norm());
  }
  r.orth_defect = defect;
  return r;
}

double hopf_defect(const SurfaceMap& u) {
  check_map(u);
  const DiskMesh& m = *u.mesh;
  const auto g = gradient(m, u.pos);
  std::vector<double> density(m.n_triangles());
  for (int t = 0; t < m.n_triangles(); ++t) {
    const Vec3 ux = g[t].col(0), uy = g[t].col(1);
    const double re = 0.25 * (ux.squaredNorm() - uy.squaredNorm());
    const double im = -0.5 * ux.dot(uy);
    density[t] = re * re + im * im;
  }
  return std::sqrt(integrate(m, density));
}

double boundary_defect(const SurfaceMap& u, const ImplicitSurface& sigma) {
  check_map(u);
  double d = 0.0;
  for (int v : u.mesh->boundary_loop) d = std::max(d, std::abs(sigma.phi(u.pos[v])));
  return d;
}

std::vector<Vec3> boundary_radial_derivative(const SurfaceMap& u) {
  check_map(u);
  const DiskMesh& m = *u.mesh;
  const auto g = gradient(m, u.pos);
  std::vector<Vec3> ur(m.n_boundary());
  for (int bi = 0; bi < m.n_boundary(); ++bi) {
    const int v = m.boundary_loop[bi];
    Grad3 avg = Grad3::Zero();
    double wsum = 0.0;
    for (int t : m.vertex_tris[v]) {
      avg += m.tri_area[t] * g[t];
      wsum += m.tri_area[t];
    }
    const Vec2 rdir = m.vertices[v].normalized();
    ur[bi] = (avg / wsum) * rdir;
  }
  return ur;
}

std::vector<double> cotan_mean_curvature(const SurfaceMap& u, int exclude_rings) {
  check_map(u);
  const DiskMesh& m = *u.mesh;
  const int nv = m.n_vertices();
  std::vector<Vec3> lap(nv, Vec3::Zero());
  std::vector<double> varea(nv, 0.0);
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const double area2 = (u.pos[tri[1]] - u.pos[tri[0]])
                             .cross(u.pos[tri[2]] - u.pos[tri[0]])
                             .norm();
    std::array<double, 3> cot;
    bool obtuse = false;
    for (int a = 0; a < 3; ++a) {
      const Vec3 e1 = u.pos[tri[(a + 1) % 3]] - u.pos[tri[a]];
      const Vec3 e2 = u.pos[tri[(a + 2) % 3]] - u.pos[tri[a]];
      cot[a] = e1.dot(e2) / area2;
      if (cot[a] < 0.0) obtuse = true;
    }
    for (int a = 0; a < 3; ++a) {
      const int vb = tri[(a + 1) % 3], vc = tri[(a + 2) % 3];
      lap[vb] += 0.5 * cot[a] * (u.pos[vc] - u.pos[vb]);
      lap[vc] += 0.5 * cot[a] * (u.pos[vb] - u.pos[vc]);
      // mixed Voronoi dual area (Meyer et al. fallback on obtuse triangles)
      if (obtuse) {
        const bool corner_obtuse = cot[a] < 0.0;
        varea[tri[a]] += area2 * (corner_obtuse ? 0.25 : 0.125);
      } else {
        const Vec3 eb = u.pos[vc] - u.pos[vb];
        varea[vb] += 0.125 * cot[a] * eb.squaredNorm();
        varea[vc] += 0.125 * cot[a] * eb.squaredNorm();
      }
    }
  }
  std::vector<int> ring(nv, -1);
  std::vector<int> frontier;
  for (int v : m.boundary_loop) {
    ring[v] = 0;
    frontier.push_back(v);
  }
  for (int depth = 1; depth <= exclude_rings; ++depth) {
    std::vector<int> next;
    for (int v : frontier)
      for (int t : m.vertex_tris[v])
        for (int w : m.triangles[t])
          if (ring[w] < 0) {
            ring[w] = depth;
            next.push_back(w);
          }
    frontier = std::move(next);
  }
  std::vector<double> h(nv, std::numeric_limits<double>::quiet_NaN());
  for (int v = 0; v < nv; ++v) {
    if (ring[v] >= 0) continue;
    h[v] = (lap[v] / varea[v]).norm();
  }
  return h;
}

namespace {

std::vector<int> boundary_rings(const DiskMesh& m, int depth) {
  std::vector<int> ring(m.n_vertices(), -1);
  std::vector<int> frontier;
  for (int v : m.boundary_loop) {
    ring[v] = 0;
    frontier.push_back(v);
  }
  for (int d = 1; d <= depth; ++d) {
    std::vector<int> next;
    for (int v : frontier)
      for (int t : m.vertex_tris[v])
        for (int w : m.triangles[t])
          if (ring[w] < 0) {
            ring[w] = d;
            next.push_back(w);
          }
    frontier = std::move(next);
  }
  return ring;
}

}  // namespace

OsculatingSphere osculating_sphere(const SurfaceMap& u, int exclude_rings) {
  check_map(u);
  const DiskMesh& m = *u.mesh;
  const auto ring = boundary_rings(m, exclude_rings);
  std::vector<Vec3> pts;
  for (int v = 0; v < m.n_vertices(); ++v)
    if (ring[v] < 0) pts.push_back(u.pos[v]);
  if (pts.size() < 5) throw std::invalid_argument("osculating_sphere: too few interior vertices");
  // algebraic fit  |p|^2 = 2 c . p + d,  R^2 = d + |c|^2
  Eigen::MatrixXd A(pts.size(), 4);
  Eigen::VectorXd b(pts.size());
  for (size_t j = 0; j < pts.size(); ++j) {
    A.row(j) << 2.0 * pts[j].transpose(), 1.0;
    b[j] = pts[j].squaredNorm();
  }
  const Eigen::Vector4d x = (A.transpose() * A).ldlt().solve(A.transpose() * b);
  OsculatingSphere fit;
  fit.center = x.head<3>();
  const double r2 = x[3] + fit.center.squaredNorm();
  fit.radius = r2 > 0.0 ? std::sqrt(r2) : 0.0;
  fit.mean_curvature = fit.radius > 1e-300 ? 2.0 / fit.radius : 0.0;
  fit.sphericity = 0.0;
  for (const auto& p : pts)
    fit.sphericity =
        std::max(fit.sphericity, std::abs((p - fit.center).norm() - fit.radius) / fit.radius);
  return fit;
}

// ---- constructors ----

SurfaceMap constant_map(std::shared_ptr<const DiskMesh> mesh, const Vec3& point) {
  SurfaceMap u;
  u.pos.assign(mesh->n_vertices(), point);
  u.mesh = std::move(mesh);
  return u;
}

SurfaceMap flat_map(std::shared_ptr<const DiskMesh> mesh, const ImplicitSurface& sigma) {
  // equatorial section of the built-in quadrics: semi-axes from the gradient scale
  Vec3 axes;
  {
    const Mat3 H = sigma.hess(Vec3::Zero());
    axes = Vec3(std::sqrt(2.0 / H(0, 0)), std::sqrt(2.0 / H(1, 1)), std::sqrt(2.0 / H(2, 2)));
  }
  SurfaceMap u;
  u.pos.resize(mesh->n_vertices());
  for (int i = 0; i < mesh->n_vertices(); ++i) {
    const Vec2 x = mesh->vertices[i];
    u.pos[i] = Vec3(axes.x() * x.x(), axes.y() * x.y(), 0.0);
  }
  u.mesh = std::move(mesh);
  return u;
}

namespace {

// Spherical cap orthogonal to the sphere of radius R, cap-sphere center
// (0,0,d) with |d| > R; covers z in [d-rho, R^2/d] for d > 0 and the mirror
// image for d < 0. Tends to the flat equatorial disk as |d| -> infinity.
Vec3 orthogonal_cap_point(double R, double d, const Vec2& x) {
  const double ad = std::abs(d);
  const double rho = std::sqrt(d * d - R * R);
  if (!(ad > R)) return Vec3(0, 0, d > 0 ? R : -R);
  const double w = std::sqrt((ad - rho) / (ad + rho));
  const double r2 = w * w * x.squaredNorm();
  const double denom = 1.0 + r2;
  const double sgn = d > 0 ? 1.0 : -1.0;
  return Vec3(2.0 * rho * w * x.x() / denom, 2.0 * rho * w * x.y() / denom,
              d + sgn * rho * (r2 - 1.0) / denom);
}

}  // namespace

SurfaceMap cap_map(std::shared_ptr<const DiskMesh> mesh, double R, double H) {
  if (!(H > 0.0)) throw std::invalid_argument("cap_map: H must be positive");
  const double rho = 2.0 / H;
  const double d = std::sqrt(R * R + rho * rho);
  SurfaceMap u;
  u.pos.resize(mesh->n_vertices());
  for (int i = 0; i < mesh->n_vertices(); ++i)
    u.pos[i] = orthogonal_cap_point(R, d, mesh->vertices[i]);
  u.mesh = std::move(mesh);
  return u;
}

SurfaceMap full_cover_map(std::shared_ptr<const DiskMesh> mesh, double R) {
  SurfaceMap u;
  u.pos.resize(mesh->n_vertices());
  for (int i = 0; i < mesh->n_vertices(); ++i) {
    const Vec2 x = mesh->vertices[i];
    const double r = x.norm();
    const double s = r > 1e-300 ? std::sin(std::numbers::pi * r) / r : std::numbers::pi;
    u.pos[i] = R * Vec3(s * x.x(), s * x.y(), std::cos(std::numbers::pi * r));
  }
  u.mesh = std::move(mesh);
  return u;
}

SurfaceMap mobius_bubble_map(std::shared_ptr<const DiskMesh> mesh, double R, const Vec2& a) {
  if (a.norm() >= 1.0) throw std::invalid_argument("mobius_bubble_map: |a| must be < 1");
  const std::complex<double> ac(a.x(), a.y());
  SurfaceMap u;
  u.pos.resize(mesh->n_vertices());
  for (int i = 0; i < mesh->n_vertices(); ++i) {
    const std::complex<double> z(mesh->vertices[i].x(), mesh->vertices[i].y());
    const std::complex<double> w = (z + ac) / (1.0 + std::conj(ac) * z);
    const double r = std::min(1.0, std::abs(w));
    const double s = r > 1e-300 ? std::sin(std::numbers::pi * r) / r : std::numbers::pi;
    u.pos[i] = R * Vec3(s * w.real(), s * w.imag(), std::cos(std::numbers::pi * r));
  }
  u.mesh = std::move(mesh);
  return u;
}

void add_tangent_noise(SurfaceMap& u, const ImplicitSurface& sigma, double amplitude,
                       std::mt19937_64& rng) {
  check_map(u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < u.mesh->n_vertices(); ++i) {
    Vec3 d(dist(rng), dist(rng), dist(rng));
    if (u.mesh->is_boundary[i]) {
      const Vec3 eta = sigma.inward_normal(u.pos[i]);
      d -= d.dot(eta) * eta;
      u.pos[i] = closest_point(sigma, u.pos[i] + amplitude * d);
    } else {
      u.pos[i] += amplitude * d;
    }
  }
}

HomotopyPath linear_path(const SurfaceMap& from, const SurfaceMap& to, int n_segments,
                         const ImplicitSurface& sigma) {
  if (from.mesh != to.mesh) throw std::invalid_argument("linear_path: mesh mismatch");
  if (n_segments < 1) throw std::invalid_argument("linear_path: need at least one segment");
  HomotopyPath path;
  path.mesh = from.mesh;
  const DiskMesh& m = *from.mesh;
  for (int b = 0; b <= n_segments; ++b) {
    const double t = static_cast<double>(b) / n_segments;
    std::vector<Vec3> bead(m.n_vertices());
    for (int i = 0; i < m.n_vertices(); ++i) {
      Vec3 p = (1.0 - t) * from.pos[i] + t * to.pos[i];
      if (m.is_boundary[i] && b != 0 && b != n_segments) p = closest_point(sigma, p);
      bead[i] = p;
    }
    path.beads.push_back(std::move(bead));
  }
  return path;
}

HomotopyPath concat(const HomotopyPath& a, const HomotopyPath& b) {
  if (a.mesh != b.mesh) throw std::invalid_argument("concat: mesh mismatch");
  HomotopyPath out = a;
  for (int k = 1; k < b.n_beads(); ++k) out.beads.push_back(b.beads[k]);
  return out;
}

HomotopyPath reversed(const HomotopyPath& path) {
  HomotopyPath out;
  out.mesh = path.mesh;
  out.beads.assign(path.beads.rbegin(), path.beads.rend());
  return out;
}

HomotopyPath refine_to_spacing(const HomotopyPath& path, double cap, const ImplicitSurface& sigma) {
  if (cap <= 0.0) throw std::invalid_argument("refine_to_spacing: cap must be positive");
  const DiskMesh& m = *path.mesh;
  HomotopyPath out = path;
  // boundary re-projection can stretch the inserted beads past the cap for
  // long chords, so refine until the measured spacing actually complies
  for (int round = 0; round < 8 && max_bead_spacing(out) > cap; ++round) {
    HomotopyPath next;
    next.mesh = out.mesh;
    next.beads.push_back(out.beads.front());
    for (int b = 0; b + 1 < out.n_beads(); ++b) {
      const auto& ua = out.beads[b];
      const auto& ub = out.beads[b + 1];
      double spacing = 0.0;
      for (int i = 0; i < m.n_vertices(); ++i)
        spacing = std::max(spacing, (ub[i] - ua[i]).norm());
      const int pieces = std::max(1, static_cast<int>(std::ceil(spacing / cap)));
      for (int s = 1; s <= pieces; ++s) {
        const double t = static_cast<double>(s) / pieces;
        std::vector<Vec3> bead(m.n_vertices());
        for (int i = 0; i < m.n_vertices(); ++i) {
          Vec3 p = (1.0 - t) * ua[i] + t * ub[i];
          if (m.is_boundary[i] && s != pieces) p = closest_point(sigma, p);
          bead[i] = p;
        }
        next.beads.push_back(std::move(bead));
      }
    }
    out = std::move(next);
  }
  if (max_bead_spacing(out) > cap)
    throw std::runtime_error("refine_to_spacing: spacing cap not reachable");
  return out;
}

HomotopyPath cap_sweepout(std::shared_ptr<const DiskMesh> mesh, const ImplicitSurface& sigma,
                          int n_beads) {
  if (n_beads < 5) throw std::invalid_argument("cap_sweepout: too few beads");
  Vec3 axes;
  {
    const Mat3 H = sigma.hess(Vec3::Zero());
    axes = Vec3(std::sqrt(2.0 / H(0, 0)), std::sqrt(2.0 / H(1, 1)), std::sqrt(2.0 / H(2, 2)));
  }
  HomotopyPath path;
  path.mesh = mesh;
  const DiskMesh& m = *mesh;
  for (int b = 0; b < n_beads; ++b) {
    // sweep parameter -1 (south pole) .. +1 (north pole); d = 1/zeta
    const double zeta = -1.0 + 2.0 * static_cast<double>(b) / (n_beads - 1);
    std::vector<Vec3> bead(m.n_vertices());
    for (int i = 0; i < m.n_vertices(); ++i) {
      Vec3 q;
      if (std::abs(zeta) < 1e-12) {
        const Vec2 x = m.vertices[i];
        q = Vec3(x.x(), x.y(), 0.0);
      } else if (std::abs(zeta) >= 1.0 - 1e-12) {
        q = Vec3(0, 0, zeta > 0 ? 1.0 : -1.0);
      } else {
        q = orthogonal_cap_point(1.0, 1.0 / zeta, m.vertices[i]);
      }
      bead[i] = q.cwiseProduct(axes);
    }
    path.beads.push_back(std::move(bead));
  }
  return path;
}

EnergyReport energy_report(const SurfaceMap& u, const HomotopyPath& path,
                           const EnergyParams& params) {
  EnergyReport rep{};
  rep.eps = params.eps;
  rep.p = params.p;
  rep.H = params.H;
  rep.D = dirichlet(u);
  rep.Deps = perturbed_dirichlet(u, params.eps, params.p);
  rep.V = swept_volume(path, params.f, params.bead_spacing_cap);
  rep.E = rep.Deps + rep.V;
  rep.hopf = hopf_defect(u);
  rep.orth_defect = residual(u, params).orth_defect;
  return rep;
}

}  // namespace cmcdisk

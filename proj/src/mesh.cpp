#include "cmcdisk/mesh.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace cmcdisk {

double pairwise_sum(std::span<const double> values) {
  const size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const size_t half = n / 2;
  return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

int DiskMesh::n_edges() const {
  // every interior edge is shared by two triangles
  return (3 * n_triangles() + n_boundary()) / 2;
}

namespace {

void finalize(DiskMesh& m) {
  const int nt = m.n_triangles();
  m.tri_area.resize(nt);
  m.tri_centroid.resize(nt);
  m.tri_jacobian_inv.resize(nt);
  m.mesh_size_h = 0.0;
  std::vector<double> areas(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = m.triangles[t];
    const Vec2 p0 = m.vertices[tri[0]];
    const Vec2 p1 = m.vertices[tri[1]];
    const Vec2 p2 = m.vertices[tri[2]];
    Mat2 J;
    J.col(0) = p1 - p0;
    J.col(1) = p2 - p0;
    const double det = J.determinant();
    if (det <= 0.0) throw std::runtime_error("mesh: non-positive triangle orientation");
    areas[t] = 0.5 * det;
    m.tri_area[t] = areas[t];
    m.tri_centroid[t] = (p0 + p1 + p2) / 3.0;
    m.tri_jacobian_inv[t] = J.inverse();
    m.mesh_size_h = std::max({m.mesh_size_h, (p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
  }
  m.area = pairwise_sum(areas);

  // directed boundary edges are the ones whose reverse never occurs
  std::map<std::pair<int, int>, int> half_edge;  // directed edge -> triangle
  for (int t = 0; t < nt; ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) half_edge[{tri[k], tri[(k + 1) % 3]}] = t;
  }
  std::map<int, std::pair<int, int>> next_of;  // start vertex -> (end vertex, tri)
  for (const auto& [e, t] : half_edge)
    if (!half_edge.count({e.second, e.first})) next_of[e.first] = {e.second, t};
  if (next_of.empty()) throw std::runtime_error("mesh: no boundary found");

  // start the loop at the boundary vertex closest to angle 0 (deterministic)
  int start = -1;
  double best = -2.0;
  for (const auto& [a, b] : next_of) {
    const double c = m.vertices[a].x();
    if (c > best || (c == best && (start < 0 || a < start))) {
      best = c;
      start = a;
    }
  }
  m.boundary_loop.clear();
  m.edge_tri.clear();
  int v = start;
  do {
    auto it = next_of.find(v);
    if (it == next_of.end()) throw std::runtime_error("mesh: boundary loop broken");
    m.boundary_loop.push_back(v);
    m.edge_tri.push_back(it->second.second);
    v = it->second.first;
  } while (v != start && m.boundary_loop.size() <= next_of.size());
  if (v != start) throw std::runtime_error("mesh: boundary is not a single loop");

  m.is_boundary.assign(m.n_vertices(), 0);
  for (int b : m.boundary_loop) m.is_boundary[b] = 1;

  const int nb = m.n_boundary();
  m.edge_len.resize(nb);
  std::vector<double> lens(nb);
  for (int i = 0; i < nb; ++i) {
    const Vec2 a = m.vertices[m.boundary_loop[i]];
    const Vec2 b = m.vertices[m.boundary_loop[(i + 1) % nb]];
    lens[i] = (b - a).norm();
    m.edge_len[i] = lens[i];
  }
  m.boundary_length = pairwise_sum(lens);

  m.vertex_tris.assign(m.n_vertices(), {});
  for (int t = 0; t < nt; ++t)
    for (int k = 0; k < 3; ++k) m.vertex_tris[m.triangles[t][k]].push_back(t);
}

}  // namespace

DiskMesh build_disk_mesh(int refinement_level) {
  if (refinement_level < 0 || refinement_level > kMaxRefinementLevel)
    throw std::invalid_argument("build_disk_mesh: refinement level out of range");

  DiskMesh m;
  m.refinement_level = refinement_level;
  m.vertices.push_back(Vec2::Zero());
  std::vector<char> on_circle{0};
  constexpr int kFan = 8;
  for (int k = 0; k < kFan; ++k) {
    const double th = 2.0 * std::numbers::pi * k / kFan;
    m.vertices.push_back(Vec2(std::cos(th), std::sin(th)));
    on_circle.push_back(1);
  }
  for (int k = 0; k < kFan; ++k) m.triangles.push_back({0, 1 + k, 1 + (k + 1) % kFan});

  for (int level = 0; level < refinement_level; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec2 p = 0.5 * (m.vertices[a] + m.vertices[b]);
      const bool boundary = on_circle[a] && on_circle[b];
      if (boundary) p.normalize();
      const int idx = m.n_vertices();
      m.vertices.push_back(p);
      on_circle.push_back(boundary ? 1 : 0);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(4 * m.triangles.size());
    for (const auto& tri : m.triangles) {
      const int a = tri[0], b = tri[1], c = tri[2];
      const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      refined.push_back({a, ab, ca});
      refined.push_back({b, bc, ab});
      refined.push_back({c, ca, bc});
      refined.push_back({ab, bc, ca});
    }
    m.triangles = std::move(refined);
  }

  finalize(m);
  return m;
}

std::vector<Vec2> gradient(const DiskMesh& mesh, std::span<const double> field) {
  if (field.size() != static_cast<size_t>(mesh.n_vertices()))
    throw std::invalid_argument("gradient: field length != vertex count");
  std::vector<Vec2> g(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Eigen::RowVector2d d(field[tri[1]] - field[tri[0]], field[tri[2]] - field[tri[0]]);
    g[t] = (d * mesh.tri_jacobian_inv[t]).transpose();
  }
  return g;
}

std::vector<Grad3> gradient(const DiskMesh& mesh, std::span<const Vec3> field) {
  if (field.size() != static_cast<size_t>(mesh.n_vertices()))
    throw std::invalid_argument("gradient: field length != vertex count");
  std::vector<Grad3> g(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    Grad3 d;
    d.col(0) = field[tri[1]] - field[tri[0]];
    d.col(1) = field[tri[2]] - field[tri[0]];
    g[t] = d * mesh.tri_jacobian_inv[t];
  }
  return g;
}

double integrate(const DiskMesh& mesh, std::span<const double> per_triangle) {
  if (per_triangle.size() != static_cast<size_t>(mesh.n_triangles()))
    throw std::invalid_argument("integrate: value count != triangle count");
  std::vector<double> terms(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) terms[t] = mesh.tri_area[t] * per_triangle[t];
  return pairwise_sum(terms);
}

double boundary_integrate(const DiskMesh& mesh, std::span<const double> per_edge) {
  if (per_edge.size() != static_cast<size_t>(mesh.n_boundary()))
    throw std::invalid_argument("boundary_integrate: value count != boundary edge count");
  std::vector<double> terms(mesh.n_boundary());
  for (int i = 0; i < mesh.n_boundary(); ++i) terms[i] = mesh.edge_len[i] * per_edge[i];
  return pairwise_sum(terms);
}

std::vector<double> lumped_vertex_mass(const DiskMesh& mesh) {
  std::vector<double> mass(mesh.n_vertices(), 0.0);
  for (int t = 0; t < mesh.n_triangles(); ++t)
    for (int k = 0; k < 3; ++k) mass[mesh.triangles[t][k]] += mesh.tri_area[t] / 3.0;
  return mass;
}

}  // namespace cmcdisk

#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>
#include <string>
#include <vector>

namespace cmcdisk {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
// per-triangle gradient of an R^3-valued P1 field: columns are d/dx1, d/dx2
using Grad3 = Eigen::Matrix<double, 3, 2>;

/// Deterministic order-stable summation (fixed binary reduction tree).
double pairwise_sum(std::span<const double> values);

/// Triangulated closed unit disk. Immutable after construction; all fields
/// are plain data and safe to share across threads.
struct DiskMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<int> boundary_loop;             // ordered CCW along |x| = 1
  std::vector<char> is_boundary;              // per vertex

  std::vector<double> tri_area;
  std::vector<Vec2> tri_centroid;
  std::vector<Mat2> tri_jacobian_inv;  // inverse of [p1-p0, p2-p0]
  std::vector<double> edge_len;        // boundary edge i: loop[i] -> loop[i+1]
  std::vector<int> edge_tri;           // triangle adjacent to boundary edge i
  std::vector<std::vector<int>> vertex_tris;  // incident triangles per vertex

  int refinement_level = 0;
  double mesh_size_h = 0.0;  // max edge length
  double area = 0.0;         // sum of tri_area
  double boundary_length = 0.0;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_boundary() const { return static_cast<int>(boundary_loop.size()); }
  int n_edges() const;  // all edges, for the Euler count
};

/// Center-fan base mesh (8 boundary vertices) with uniform 1->4 refinement;
/// boundary vertices are re-projected onto the unit circle at every level.
DiskMesh build_disk_mesh(int refinement_level);

constexpr int kMaxRefinementLevel = 8;

/// P1 gradients, constant per triangle. Exact on affine fields.
std::vector<Vec2> gradient(const DiskMesh& mesh, std::span<const double> field);
std::vector<Grad3> gradient(const DiskMesh& mesh, std::span<const Vec3> field);

/// Centroid-rule integral of a per-triangle quantity.
double integrate(const DiskMesh& mesh, std::span<const double> per_triangle);
/// Midpoint-rule integral of a per-boundary-edge quantity against arc length.
double boundary_integrate(const DiskMesh& mesh, std::span<const double> per_edge);

/// Lumped L2 vertex masses (row sums of the P1 mass matrix).
std::vector<double> lumped_vertex_mass(const DiskMesh& mesh);

}  // namespace cmcdisk

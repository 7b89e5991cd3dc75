#include "cmcdisk/io.hpp"

#include "cmcdisk/solver.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cmcdisk {

std::string fmt_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("fmt_double failed");
  return std::string(buf, ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  return os;
}

void obj_body(std::ostream& os, const DiskMesh& mesh, const std::vector<Vec3>* pos) {
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    if (pos) {
      const Vec3& p = (*pos)[i];
      os << "v " << fmt_double(p.x()) << " " << fmt_double(p.y()) << " " << fmt_double(p.z())
         << "\n";
    } else {
      const Vec2& p = mesh.vertices[i];
      os << "v " << fmt_double(p.x()) << " " << fmt_double(p.y()) << " 0\n";
    }
  }
  for (const auto& t : mesh.triangles)
    os << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

void vtk_body(std::ostream& os, const DiskMesh& mesh, const std::vector<Vec3>* pos) {
  os << "# vtk DataFile Version 3.0\ncmcdisk\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.n_vertices() << " double\n";
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    if (pos) {
      const Vec3& p = (*pos)[i];
      os << fmt_double(p.x()) << " " << fmt_double(p.y()) << " " << fmt_double(p.z()) << "\n";
    } else {
      const Vec2& p = mesh.vertices[i];
      os << fmt_double(p.x()) << " " << fmt_double(p.y()) << " 0\n";
    }
  }
  os << "CELLS " << mesh.n_triangles() << " " << 4 * mesh.n_triangles() << "\n";
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  os << "CELL_TYPES " << mesh.n_triangles() << "\n";
  for (int t = 0; t < mesh.n_triangles(); ++t) os << "5\n";
}

}  // namespace

void write_obj(const std::filesystem::path& path, const DiskMesh& mesh) {
  auto os = open_out(path);
  obj_body(os, mesh, nullptr);
}

void write_obj(const std::filesystem::path& path, const SurfaceMap& map) {
  auto os = open_out(path);
  obj_body(os, *map.mesh, &map.pos);
}

void write_vtk(const std::filesystem::path& path, const DiskMesh& mesh) {
  auto os = open_out(path);
  vtk_body(os, mesh, nullptr);
}

void write_vtk(const std::filesystem::path& path, const SurfaceMap& map) {
  auto os = open_out(path);
  vtk_body(os, *map.mesh, &map.pos);
}

void write_bnd(const std::filesystem::path& path, const DiskMesh& mesh) {
  auto os = open_out(path);
  for (int v : mesh.boundary_loop) os << v << "\n";
}

SurfaceMap read_map(const std::filesystem::path& obj_path, const std::filesystem::path& bnd_path,
                    std::shared_ptr<const DiskMesh> mesh) {
  std::ifstream is(obj_path);
  if (!is) throw std::runtime_error("cannot open map file: " + obj_path.string());
  std::vector<Vec3> pos;
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("v ", 0) != 0) continue;
    std::istringstream ls(line.substr(2));
    Vec3 p;
    if (!(ls >> p.x() >> p.y() >> p.z()))
      throw std::runtime_error("malformed vertex line in " + obj_path.string());
    pos.push_back(p);
  }
  if (pos.size() != static_cast<size_t>(mesh->n_vertices()))
    throw std::runtime_error("map file vertex count does not match the mesh");

  std::ifstream bs(bnd_path);
  if (!bs) throw std::runtime_error("cannot open boundary sidecar: " + bnd_path.string());
  std::vector<int> loop;
  int idx;
  while (bs >> idx) loop.push_back(idx);
  if (loop != mesh->boundary_loop)
    throw std::runtime_error("boundary sidecar does not match the mesh loop");

  SurfaceMap u;
  u.mesh = std::move(mesh);
  u.pos = std::move(pos);
  return u;
}

void write_iterations_csv(const std::filesystem::path& path, std::span<const IterRow> rows) {
  auto os = open_out(path);
  os << "iter,E,D,residual,step,orth_defect\n";
  for (const auto& r : rows)
    os << r.iter << "," << fmt_double(r.energy) << "," << fmt_double(r.D) << ","
       << fmt_double(r.residual) << "," << fmt_double(r.step) << ","
       << fmt_double(r.orth_defect) << "\n";
}

void write_energy_csv(const std::filesystem::path& path, std::span<const EnergyReport> rows) {
  auto os = open_out(path);
  os << "eps,p,H,D,Deps,V,E,hopf_defect,orth_defect\n";
  for (const auto& r : rows)
    os << fmt_double(r.eps) << "," << fmt_double(r.p) << "," << fmt_double(r.H) << ","
       << fmt_double(r.D) << "," << fmt_double(r.Deps) << "," << fmt_double(r.V) << ","
       << fmt_double(r.E) << "," << fmt_double(r.hopf) << "," << fmt_double(r.orth_defect)
       << "\n";
}

void write_spectrum_json(const std::filesystem::path& path, const SpectralReport& report) {
  nlohmann::ordered_json j;
  j["eigenvalues"] = report.eigenvalues;
  j["index"] = report.index;
  j["nullity"] = report.nullity;
  j["index_tol"] = report.index_tol;
  j["dof_count"] = report.dofs;
  auto os = open_out(path);
  os << j.dump(2) << "\n";
}

}  // namespace cmcdisk

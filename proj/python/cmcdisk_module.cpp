#include "cmcdisk/pipeline.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace cmcdisk;

namespace {

using MeshPtr = std::shared_ptr<const DiskMesh>;

py::array_t<double> positions_array(const std::vector<Vec3>& pos) {
  py::array_t<double> out({static_cast<py::ssize_t>(pos.size()), py::ssize_t(3)});
  auto r = out.mutable_unchecked<2>();
  for (size_t i = 0; i < pos.size(); ++i)
    for (int k = 0; k < 3; ++k) r(i, k) = pos[i][k];
  return out;
}

std::vector<Vec3> positions_vector(const MeshPtr& mesh, const py::array_t<double>& arr) {
  const auto r = arr.unchecked<2>();
  if (r.shape(0) != mesh->n_vertices() || r.shape(1) != 3)
    throw std::invalid_argument("positions must have shape (n_vertices, 3)");
  std::vector<Vec3> pos(r.shape(0));
  for (py::ssize_t i = 0; i < r.shape(0); ++i) pos[i] = Vec3(r(i, 0), r(i, 1), r(i, 2));
  return pos;
}

SurfaceMap as_map(const MeshPtr& mesh, const py::array_t<double>& arr) {
  return SurfaceMap{mesh, positions_vector(mesh, arr)};
}

py::dict report_dict(const SolveReport& rep) {
  py::dict d;
  d["converged"] = rep.converged;
  d["status"] = to_string(rep.status);
  d["iterations"] = rep.iterations;
  d["newton_iterations"] = rep.newton_iterations;
  d["residual"] = rep.residual_norm;
  d["orth_defect"] = rep.orth_defect;
  d["boundary_defect"] = rep.boundary_defect;
  d["D"] = rep.D;
  d["Deps"] = rep.Deps;
  d["E"] = rep.energy;
  d["hopf_defect"] = rep.hopf;
  d["classification"] = rep.classification;
  d["max_principle"] = to_string(rep.max_principle.status);
  d["max_offset"] = rep.max_principle.max_offset;
  return d;
}

SolveConfig config_from_kwargs(const py::kwargs& kw) {
  SolveConfig cfg;
  for (auto item : kw) {
    const auto key = item.first.cast<std::string>();
    if (key == "grad_tol") cfg.grad_tol = item.second.cast<double>();
    else if (key == "max_iters") cfg.max_iters = item.second.cast<int>();
    else if (key == "newton_switch_tol") cfg.newton_switch_tol = item.second.cast<double>();
    else if (key == "newton_max_iters") cfg.newton_max_iters = item.second.cast<int>();
    else if (key == "beta_num") cfg.beta_num = item.second.cast<double>();
    else if (key == "eta_num") cfg.eta_num = item.second.cast<double>();
    else if (key == "mesh_tol_C") cfg.mesh_tol_C = item.second.cast<double>();
    else if (key == "seed") cfg.seed = item.second.cast<std::uint64_t>();
    else throw std::invalid_argument("unknown solver option: " + key);
  }
  return cfg;
}

}  // namespace

PYBIND11_MODULE(cmcdisk, m) {
  m.doc() = "free-boundary constant-mean-curvature disk solver";

  py::class_<DiskMesh, std::shared_ptr<DiskMesh>>(m, "Mesh")
      .def_property_readonly("n_vertices", &DiskMesh::n_vertices)
      .def_property_readonly("n_triangles", &DiskMesh::n_triangles)
      .def_property_readonly("n_edges", &DiskMesh::n_edges)
      .def_property_readonly("n_boundary", &DiskMesh::n_boundary)
      .def_readonly("area", &DiskMesh::area)
      .def_readonly("boundary_length", &DiskMesh::boundary_length)
      .def_readonly("h", &DiskMesh::mesh_size_h)
      .def_readonly("level", &DiskMesh::refinement_level)
      .def_property_readonly("vertices",
                             [](const DiskMesh& mesh) {
                               py::array_t<double> out(
                                   {static_cast<py::ssize_t>(mesh.n_vertices()), py::ssize_t(2)});
                               auto r = out.mutable_unchecked<2>();
                               for (int i = 0; i < mesh.n_vertices(); ++i) {
                                 r(i, 0) = mesh.vertices[i].x();
                                 r(i, 1) = mesh.vertices[i].y();
                               }
                               return out;
                             })
      .def_property_readonly("triangles",
                             [](const DiskMesh& mesh) {
                               py::array_t<int> out(
                                   {static_cast<py::ssize_t>(mesh.n_triangles()), py::ssize_t(3)});
                               auto r = out.mutable_unchecked<2>();
                               for (int t = 0; t < mesh.n_triangles(); ++t)
                                 for (int k = 0; k < 3; ++k) r(t, k) = mesh.triangles[t][k];
                               return out;
                             })
      .def_property_readonly("boundary_loop",
                             [](const DiskMesh& mesh) { return mesh.boundary_loop; });

  m.def("build_disk_mesh",
        [](int level) { return std::make_shared<DiskMesh>(build_disk_mesh(level)); },
        py::arg("level"));

  py::class_<ImplicitSurface>(m, "Surface")
      .def_readonly("spec", &ImplicitSurface::spec)
      .def_readonly("bound_radius", &ImplicitSurface::bound_radius)
      .def_readonly("enclosed_volume", &ImplicitSurface::enclosed_volume)
      .def("phi", [](const ImplicitSurface& s, double x, double y,
                     double z) { return s.phi(Vec3(x, y, z)); })
      .def("closest_point",
           [](const ImplicitSurface& s, double x, double y, double z) {
             const Vec3 q = closest_point(s, Vec3(x, y, z));
             return py::make_tuple(q.x(), q.y(), q.z());
           })
      .def("mean_curvature", [](const ImplicitSurface& s, double x, double y, double z) {
        return mean_curvature(s, closest_point(s, Vec3(x, y, z)));
      });

  m.def("sphere", &make_sphere, py::arg("radius"));
  m.def("ellipsoid", &make_ellipsoid, py::arg("a"), py::arg("b"), py::arg("c"));
  m.def("parse_surface", &parse_surface, py::arg("spec"));

  py::class_<EnergyParams>(m, "Params")
      .def_readonly("eps", &EnergyParams::eps)
      .def_readonly("p", &EnergyParams::p)
      .def_readonly("H", &EnergyParams::H)
      .def_property_readonly("t0", [](const EnergyParams& p) { return p.barrier.t0; });

  m.def("make_params",
        [](const ImplicitSurface& sigma, const ImplicitSurface& barrier, double H0, double H,
           double eps, double p) { return make_params(sigma, barrier, H0, H, eps, p); },
        py::arg("surface"), py::arg("barrier"), py::arg("H0"), py::arg("H"),
        py::arg("eps") = 0.0, py::arg("p") = 2.2);

  m.def("flat_map", [](MeshPtr mesh, const ImplicitSurface& sigma) {
    return positions_array(flat_map(std::move(mesh), sigma).pos);
  });
  m.def("cap_map", [](MeshPtr mesh, double R, double H) {
    return positions_array(cap_map(std::move(mesh), R, H).pos);
  });
  m.def("constant_map", [](MeshPtr mesh, double x, double y, double z) {
    return positions_array(constant_map(std::move(mesh), Vec3(x, y, z)).pos);
  });

  m.def("dirichlet",
        [](MeshPtr mesh, py::array_t<double> pos) { return dirichlet(as_map(mesh, pos)); });
  m.def("perturbed_dirichlet", [](MeshPtr mesh, py::array_t<double> pos, double eps, double p) {
    return perturbed_dirichlet(as_map(mesh, pos), eps, p);
  });
  m.def("hopf_defect",
        [](MeshPtr mesh, py::array_t<double> pos) { return hopf_defect(as_map(mesh, pos)); });
  m.def("residual_norm", [](MeshPtr mesh, py::array_t<double> pos, const EnergyParams& params) {
    const auto res = residual(as_map(mesh, pos), params);
    return py::make_tuple(res.norm, res.orth_defect);
  });
  m.def("mean_curvature_deviation",
        [](MeshPtr mesh, py::array_t<double> pos, double H) {
          return mean_curvature_deviation(as_map(mesh, pos), H);
        });

  m.def("solve",
        [](MeshPtr mesh, py::array_t<double> pos, const EnergyParams& params,
           const py::kwargs& kw) {
          auto [u, rep] = solve_critical_point(as_map(mesh, pos), params, config_from_kwargs(kw));
          return py::make_tuple(positions_array(u.pos), report_dict(rep));
        },
        py::arg("mesh"), py::arg("positions"), py::arg("params"));

  m.def("morse_index",
        [](MeshPtr mesh, py::array_t<double> pos, const EnergyParams& params, int k,
           double index_tol) {
          const auto rep =
              morse_index(assemble_second_variation(as_map(mesh, pos), params), k, index_tol);
          py::dict d;
          d["eigenvalues"] = rep.eigenvalues;
          d["index"] = rep.index;
          d["nullity"] = rep.nullity;
          d["index_tol"] = rep.index_tol;
          d["dof_count"] = rep.dofs;
          return d;
        },
        py::arg("mesh"), py::arg("positions"), py::arg("params"), py::arg("k") = 12,
        py::arg("index_tol") = -1.0);

  m.def("hersch_bound_check",
        [](MeshPtr mesh, py::array_t<double> pos, double H, const ImplicitSurface& sigma) {
          const auto hb = hersch_bound_check(as_map(mesh, pos), H, sigma);
          py::dict d;
          d["D"] = hb.D;
          d["bound"] = hb.bound;
          d["margin"] = hb.margin;
          d["pass"] = hb.pass;
          d["sharper"] = hb.sharper;
          return d;
        },
        py::arg("mesh"), py::arg("positions"), py::arg("H"), py::arg("surface"));

  m.def("check_max_principle",
        [](MeshPtr mesh, py::array_t<double> pos, const EnergyParams& params, double C) {
          const auto mp = check_max_principle(as_map(mesh, pos), params, C);
          py::dict d;
          d["status"] = to_string(mp.status);
          d["max_offset"] = mp.max_offset;
          d["mesh_tol"] = mp.mesh_tol;
          d["t0"] = mp.t0;
          return d;
        },
        py::arg("mesh"), py::arg("positions"), py::arg("params"), py::arg("mesh_tol_C") = 4.0);

  m.def("index_comparison_check",
        [](MeshPtr mesh, py::array_t<double> pos, const EnergyParams& params, int k,
           double index_tol) {
          const auto cmp = index_comparison_check(as_map(mesh, pos), params, k, index_tol);
          py::dict d;
          d["index_area_form"] = cmp.index_area;
          d["index_energy_form"] = cmp.index_energy;
          d["pass"] = cmp.pass;
          return d;
        },
        py::arg("mesh"), py::arg("positions"), py::arg("params"), py::arg("k") = 12,
        py::arg("index_tol") = 0.05);

  m.def("sweepout_volume",
        [](MeshPtr mesh, const ImplicitSurface& sigma, int beads) {
          const auto path = refine_to_spacing(cap_sweepout(mesh, sigma, beads),
                                              0.045 * sigma.diameter(), sigma);
          return swept_volume(path, CurvatureField::constant(1.0), 0.05 * sigma.diameter());
        },
        py::arg("mesh"), py::arg("surface"), py::arg("beads") = 33);

  m.def("run_subcommand",
        [](const std::string& name, const std::map<std::string, std::string>& config,
           const std::string& outdir) {
          RunConfig cfg;
          for (const auto& [k, v] : config) cfg.set(k, v);
          return run_subcommand(name, cfg, outdir);
        },
        py::arg("name"), py::arg("config"), py::arg("outdir"));
}

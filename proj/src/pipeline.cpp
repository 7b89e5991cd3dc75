#include "cmcdisk/pipeline.hpp"

#include "cmcdisk/io.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace cmcdisk {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Artifacts {
  fs::path dir;
  std::vector<std::string> names;

  fs::path file(const std::string& name) {
    names.push_back(name);
    return dir / name;
  }
};

void write_run_meta(Artifacts& art) {
  const auto now = std::chrono::system_clock::now();
  json j;
  j["wall_clock_unix_seconds"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  std::ofstream os(art.file("run_meta.json"), std::ios::binary);
  os << j.dump(2) << "\n";
}

void write_summary(const Artifacts& art, const std::string& subcommand, const RunConfig& cfg,
                   const json& results) {
  json j;
  j["schema"] = 1;
  j["subcommand"] = subcommand;
  json conf = json::object();
  for (const auto& [k, v] : cfg.resolved()) conf[k] = v;
  j["config"] = conf;
  j["config_hash"] = cfg.hash();
  j["artifacts"] = art.names;
  j["results"] = results;
  std::ofstream os(art.dir / "summary.json", std::ios::binary);
  os << j.dump(2) << "\n";
}

std::shared_ptr<const DiskMesh> build_mesh(const RunConfig& cfg) {
  return std::make_shared<DiskMesh>(build_disk_mesh(cfg.level()));
}

SurfaceMap initial_map(const RunConfig& cfg, std::shared_ptr<const DiskMesh> mesh,
                       const EnergyParams& params) {
  const std::string init = cfg.get_string("init", "flat");
  SurfaceMap u;
  if (init == "flat") {
    u = flat_map(mesh, params.sigma);
  } else if (init == "cap") {
    if (!(params.H > 0)) throw std::invalid_argument("init=cap requires H > 0");
    if (params.sigma.spec.rfind("sphere", 0) != 0)
      throw std::invalid_argument("init=cap requires a sphere constraint");
    u = cap_map(mesh, params.sigma.bound_radius, params.H);
  } else if (init == "constant") {
    u = constant_map(mesh, closest_point(params.sigma,
                                         Vec3(0, 0, params.sigma.bound_radius)));
  } else {
    fs::path obj(init);
    fs::path bnd = obj;
    bnd.replace_extension(".bnd");
    u = read_map(obj, bnd, mesh);
  }
  const double noise = cfg.get_double("noise", 0.0);
  if (noise > 0.0) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(cfg.get_int("seed", 0)));
    add_tangent_noise(u, params.sigma, noise, rng);
  }
  return u;
}

json max_principle_json(const MaxPrincipleResult& mp) {
  json j;
  j["status"] = to_string(mp.status);
  j["max_offset"] = mp.max_offset;
  j["mesh_tol"] = mp.mesh_tol;
  j["t0"] = mp.t0;
  return j;
}

json report_json(const SolveReport& rep) {
  json j;
  j["converged"] = rep.converged;
  j["status"] = to_string(rep.status);
  j["iterations"] = rep.iterations;
  j["newton_iterations"] = rep.newton_iterations;
  j["residual"] = rep.residual_norm;
  j["orth_defect"] = rep.orth_defect;
  j["boundary_defect"] = rep.boundary_defect;
  j["D"] = rep.D;
  j["Deps"] = rep.Deps;
  j["E"] = rep.energy;
  j["hopf_defect"] = rep.hopf;
  j["classification"] = rep.classification;
  j["max_principle"] = max_principle_json(rep.max_principle);
  return j;
}

json spectral_json(const SpectralReport& rep) {
  json j;
  j["eigenvalues"] = rep.eigenvalues;
  j["index"] = rep.index;
  j["nullity"] = rep.nullity;
  j["index_tol"] = rep.index_tol;
  j["dof_count"] = rep.dofs;
  return j;
}

void write_map_artifacts(Artifacts& art, const SurfaceMap& u, const std::string& stem) {
  write_obj(art.file(stem + ".obj"), u);
  write_bnd(art.file(stem + ".bnd"), *u.mesh);
}

// paths used by the quantization check: a direct chain to u and the same
// chain prefixed with one degree-one sweepout
double quantization_ratio(const SurfaceMap& u, const EnergyParams& params, int beads) {
  const auto mesh = u.mesh;
  const auto c = constant_map(mesh, closest_point(params.sigma,
                                                  Vec3(0, 0, params.sigma.bound_radius)));
  // refine with margin: the boundary re-projection can stretch a bead pair
  const double cap = 0.9 * params.bead_spacing_cap;
  const auto direct = refine_to_spacing(linear_path(c, u, 4, params.sigma), cap, params.sigma);
  const auto loop = refine_to_spacing(cap_sweepout(mesh, params.sigma, beads), cap, params.sigma);
  const double dv = swept_volume(concat(loop, direct), params.f, params.bead_spacing_cap) -
                    swept_volume(direct, params.f, params.bead_spacing_cap);
  return dv / params.f.integral_inside(params.sigma);
}

}  // namespace

int run_solve(const RunConfig& cfg, const fs::path& outdir) {
  Artifacts art{outdir, {}};
  fs::create_directories(outdir);
  auto mesh = build_mesh(cfg);
  const auto params = cfg.energy_params();
  const auto scfg = cfg.solve_config();
  const SurfaceMap u0 = initial_map(cfg, mesh, params);

  CheckpointFn checkpoint;
  if (scfg.checkpoint_every > 0) {
    checkpoint = [&art](int iter, const SurfaceMap& u) {
      char stem[32];
      std::snprintf(stem, sizeof(stem), "checkpoint_%06d", iter);
      write_map_artifacts(art, u, stem);
    };
  }
  auto [u, rep] = solve_critical_point(u0, params, scfg, checkpoint);

  write_map_artifacts(art, u, "map");
  write_iterations_csv(art.file("iterations.csv"), rep.history);

  json results = report_json(rep);
  if (rep.converged && rep.classification == "nonconstant critical point") {
    const auto spec = morse_index(assemble_second_variation(u, params), scfg.spectrum_k,
                                  scfg.index_tol);
    results["morse_index"] = spectral_json(spec);
  }
  write_run_meta(art);
  write_summary(art, "solve", cfg, results);
  return rep.converged ? 0 : 2;
}

int run_continue(const RunConfig& cfg, const fs::path& outdir) {
  Artifacts art{outdir, {}};
  fs::create_directories(outdir);
  auto mesh = build_mesh(cfg);
  const auto scfg = cfg.solve_config();
  const std::string mode = cfg.get_string("continue.mode", "eps");

  json results;
  std::vector<EnergyReport> stage_rows;
  bool completed = false;

  if (mode == "eps") {
    const auto params = cfg.energy_params();
    const SurfaceMap u0 = initial_map(cfg, mesh, params);
    const auto run = continue_epsilon(u0, params, scfg);
    completed = run.completed;
    json stages = json::array();
    for (const auto& st : run.stages) {
      json s = report_json(st.report);
      s["eps"] = st.eps;
      stages.push_back(s);
      EnergyParams p = params;
      p.eps = st.eps;
      stage_rows.push_back({st.eps, p.p, p.H, st.report.D, st.report.Deps,
                            st.report.tracked_volume, st.report.energy, st.report.hopf,
                            st.report.orth_defect});
    }
    results["stages"] = stages;
    if (!run.completed) {
      json conc;
      conc["detected"] = run.concentration.detected;
      json entries = json::array();
      for (const auto& e : run.concentration.entries) {
        json je;
        je["eps"] = e.eps;
        je["found"] = e.found;
        je["center"] = {e.center.x(), e.center.y()};
        je["t_scale"] = e.t_scale;
        je["t_detect"] = e.t_detect;
        je["local_energy"] = e.local_energy;
        je["eps_over_t"] = e.eps_over_t;
        je["dist_boundary"] = e.dist_boundary;
        entries.push_back(je);
      }
      conc["entries"] = entries;
      results["concentration"] = conc;
    }
    if (!run.stages.empty()) write_map_artifacts(art, run.stages.back().map, "map");
  } else if (mode == "H") {
    const auto H_values = cfg.get_doubles("continue.H_values", {0.5, 0.75, 1.0});
    SurfaceMap u = initial_map(cfg, mesh, cfg.energy_params());
    json stages = json::array();
    completed = true;
    for (double H : H_values) {
      RunConfig stage_cfg = cfg;
      stage_cfg.set("H", fmt_double(H));
      const auto params = stage_cfg.energy_params();
      auto [map, rep] = solve_critical_point(u, params, scfg);
      u = std::move(map);
      json s = report_json(rep);
      s["H"] = H;
      stages.push_back(s);
      stage_rows.push_back({params.eps, params.p, H, rep.D, rep.Deps, rep.tracked_volume,
                            rep.energy, rep.hopf, rep.orth_defect});
      if (!rep.converged) {
        completed = false;
        break;
      }
    }
    results["stages"] = stages;
    write_map_artifacts(art, u, "map");
  } else {
    throw std::invalid_argument("continue.mode must be 'eps' or 'H'");
  }

  results["completed"] = completed;
  write_energy_csv(art.file("stages.csv"), stage_rows);
  write_run_meta(art);
  write_summary(art, "continue", cfg, results);
  return completed ? 0 : 2;
}

int run_minmax(const RunConfig& cfg, const fs::path& outdir) {
  Artifacts art{outdir, {}};
  fs::create_directories(outdir);
  auto mesh = build_mesh(cfg);
  const auto params = cfg.energy_params();
  const auto scfg = cfg.solve_config();

  const auto seed = cap_sweepout(mesh, params.sigma, scfg.minmax_beads);
  const auto res = mountain_pass(seed, params, scfg);

  write_map_artifacts(art, res.max_slice, "maxslice");
  {
    std::ofstream os(art.file("minmax.csv"), std::ios::binary);
    os << "sweep,omega\n";
    for (size_t i = 0; i < res.omega_history.size(); ++i)
      os << i << "," << fmt_double(res.omega_history[i]) << "\n";
  }

  json results;
  results["omega"] = res.omega;
  results["converged"] = res.converged;
  results["sweeps"] = res.sweeps;
  results["max_slice_residual"] = res.max_slice_residual;
  results["max_slice_index"] = res.max_slice_index;
  results["degree"] = res.degree;
  results["max_slice_D"] = dirichlet(res.max_slice);

  if (cfg.get_bool("minmax.run_sweep", true)) {
    const auto rows = monotonicity_sweep(mesh, params, scfg);
    std::ofstream os(art.file("sweep.csv"), std::ios::binary);
    os << "r,omega,omega_over_r,slope,flagged,ok\n";
    json sweep = json::array();
    for (const auto& row : rows) {
      os << fmt_double(row.r) << "," << fmt_double(row.omega) << ","
         << fmt_double(row.omega_over_r) << "," << fmt_double(row.slope) << ","
         << (row.flagged ? 1 : 0) << "," << (row.ok ? 1 : 0) << "\n";
      json jr;
      jr["r"] = row.r;
      jr["omega"] = row.omega;
      jr["omega_over_r"] = row.omega_over_r;
      jr["slope"] = row.slope;
      jr["flagged"] = row.flagged;
      jr["ok"] = row.ok;
      if (!row.ok) jr["error"] = row.error;
      sweep.push_back(jr);
    }
    results["monotonicity"] = sweep;
  }

  write_run_meta(art);
  write_summary(art, "minmax", cfg, results);
  return res.converged ? 0 : 2;
}

int run_spectrum(const RunConfig& cfg, const fs::path& outdir) {
  Artifacts art{outdir, {}};
  fs::create_directories(outdir);
  auto mesh = build_mesh(cfg);
  const auto params = cfg.energy_params();
  const auto scfg = cfg.solve_config();
  const SurfaceMap u = initial_map(cfg, mesh, params);

  const int n_vectors = cfg.get_int("spectrum.vectors", 0);
  const auto sys = assemble_second_variation(u, params);
  const auto rep = morse_index(sys, scfg.spectrum_k, scfg.index_tol, n_vectors > 0);
  write_spectrum_json(art.file("spectrum.json"), rep);
  if (rep.eigenvectors) {
    for (int j = 0; j < n_vectors && j < static_cast<int>(rep.eigenvectors->size()); ++j) {
      const auto field = embed_field(sys, (*rep.eigenvectors)[j]);
      SurfaceMap disp{mesh, field};
      char stem[32];
      std::snprintf(stem, sizeof(stem), "eigvec_%02d", j);
      write_obj(art.file(std::string(stem) + ".obj"), disp);
    }
  }

  json results = spectral_json(rep);
  write_run_meta(art);
  write_summary(art, "spectrum", cfg, results);
  return 0;
}

int run_check(const RunConfig& cfg, const fs::path& outdir) {
  Artifacts art{outdir, {}};
  fs::create_directories(outdir);
  auto mesh = build_mesh(cfg);
  const auto params = cfg.energy_params();
  const auto scfg = cfg.solve_config();
  const SurfaceMap u = initial_map(cfg, mesh, params);
  const double h2 = mesh->mesh_size_h * mesh->mesh_size_h;

  json checks;
  bool all_pass = true;
  auto record = [&](const std::string& name, bool pass, json detail) {
    detail["pass"] = pass;
    checks[name] = detail;
    all_pass = all_pass && pass;
  };

  {
    const auto mp = check_max_principle(u, params, scfg.mesh_tol_C);
    const bool pass = params.eps == 0.0 ? mp.status == MaxPrincipleStatus::pass_b
                                        : mp.status != MaxPrincipleStatus::fail;
    record("max_principle", pass, max_principle_json(mp));
  }
  {
    const double hopf = hopf_defect(u);
    const double tol = cfg.get_double("check.hopf_tol", 5e-2);
    json d;
    d["hopf_defect"] = hopf;
    d["tol"] = tol;
    record("hopf_defect", hopf <= tol, d);
  }
  {
    json d;
    if (params.H > 0.0) {
      const double ratio = quantization_ratio(u, params, scfg.minmax_beads);
      const double tol = cfg.get_double("check.quantization_tol", 0.01);
      d["ratio"] = ratio;
      d["nearest_integer"] = std::round(ratio);
      d["tol"] = tol;
      record("volume_quantization",
             std::abs(ratio - std::round(ratio)) <= tol && std::lround(ratio) == 1, d);
    } else {
      d["skipped"] = "H = 0 has a vanishing volume quantum";
      record("volume_quantization", true, d);
    }
  }
  {
    json d;
    if (params.H > 0.0) {
      const auto hb = hersch_bound_check(u, params.H, params.sigma, scfg.mesh_tol_C * h2);
      d["D"] = hb.D;
      d["bound"] = hb.bound;
      d["margin"] = hb.margin;
      d["sharper"] = hb.sharper;
      d["boundary_integral"] = hb.boundary_integral;
      record("hersch_bound", hb.pass, d);
    } else {
      d["skipped"] = "H = 0";
      record("hersch_bound", true, d);
    }
  }
  {
    const double band = cfg.get_double("check.index_tol", 0.05);
    const auto cmp = index_comparison_check(u, params, scfg.spectrum_k, band);
    json d;
    d["index_area_form"] = cmp.index_area;
    d["index_energy_form"] = cmp.index_energy;
    d["index_tol"] = band;
    record("index_comparison", cmp.pass, d);
  }

  {
    std::ofstream os(art.file("checks.json"), std::ios::binary);
    os << checks.dump(2) << "\n";
  }
  json results;
  results["checks"] = checks;
  results["all_pass"] = all_pass;
  write_run_meta(art);
  write_summary(art, "check", cfg, results);
  return all_pass ? 0 : 2;
}

int run_export(const RunConfig& cfg, const fs::path& outdir) {
  Artifacts art{outdir, {}};
  fs::create_directories(outdir);
  auto mesh = build_mesh(cfg);
  const std::string format = cfg.get_string("export.format", "vtk");
  const std::string input = cfg.get_string("export.in", "");

  json results;
  if (input.empty()) {
    if (format == "vtk") write_vtk(art.file("mesh.vtk"), *mesh);
    else if (format == "obj") write_obj(art.file("mesh.obj"), *mesh);
    else throw std::invalid_argument("export.format must be 'obj' or 'vtk'");
    results["exported"] = "mesh";
  } else {
    fs::path obj(input);
    fs::path bnd = obj;
    bnd.replace_extension(".bnd");
    const SurfaceMap u = read_map(obj, bnd, mesh);
    if (format == "vtk") write_vtk(art.file("map.vtk"), u);
    else if (format == "obj") write_map_artifacts(art, u, "map");
    else throw std::invalid_argument("export.format must be 'obj' or 'vtk'");
    results["exported"] = input;
  }
  results["format"] = format;
  write_run_meta(art);
  write_summary(art, "export", cfg, results);
  return 0;
}

int run_subcommand(const std::string& name, const RunConfig& cfg, const fs::path& outdir) {
  if (name == "solve") return run_solve(cfg, outdir);
  if (name == "continue") return run_continue(cfg, outdir);
  if (name == "minmax") return run_minmax(cfg, outdir);
  if (name == "spectrum") return run_spectrum(cfg, outdir);
  if (name == "check") return run_check(cfg, outdir);
  if (name == "export") return run_export(cfg, outdir);
  throw std::invalid_argument("unknown subcommand: " + name);
}

}  // namespace cmcdisk

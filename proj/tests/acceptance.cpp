// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Expected values come from the closed-form oracles evaluated
// here (Steklov spectrum of the disk, two-sphere orthogonal cap geometry,
// ball volume, finite differences); tolerances are fixed below.

#include "cmcdisk/io.hpp"
#include "cmcdisk/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace cmcdisk;
constexpr double kPi = std::numbers::pi;

namespace {

struct Criterion {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Criterion> g_results;

void record(int id, bool pass, const std::string& detail) {
  g_results.push_back({id, pass, detail});
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const DiskMesh> mesh_at(int level) {
  return std::make_shared<DiskMesh>(build_disk_mesh(level));
}

EnergyParams unit_ball_params(double H, double eps) {
  return make_params(make_sphere(1.0), make_sphere(1.0), 2.0, H, eps);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

// Steklov oracle: the disk Steklov spectrum is {0, 1, 1, 2, 2, ...}; the
// quadratic form int |grad psi|^2 - bdry int |psi|^2 is negative exactly on
// the sigma = 0 mode (admissible as a vertical constant), so the energy
// index of the flat equatorial disk is 1 and the sigma = 1 modes give
// nullity >= 2.
constexpr int kSteklovIndex = 1;

// Closed-form cap oracle (two-sphere orthogonality d^2 = 1 + rho^2)
double cap_area_oracle(double H) {
  const double rho = 2.0 / H;
  const double d = std::sqrt(1.0 + rho * rho);
  const double height = rho - (d * d + rho * rho - 1.0) / (2.0 * d);
  return 2.0 * kPi * rho * height;
}

SurfaceMap random_admissible_map(std::shared_ptr<const DiskMesh> mesh,
                                 const ImplicitSurface& sigma, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> hdist(0.6, 1.4);
  SurfaceMap u = cap_map(mesh, 1.0, hdist(rng));
  add_tangent_noise(u, sigma, 0.02, rng);
  return u;
}

std::vector<Vec3> random_admissible_field(const SurfaceMap& u, const ImplicitSurface& sigma,
                                          std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Vec3> psi(u.mesh->n_vertices());
  for (int i = 0; i < u.mesh->n_vertices(); ++i) {
    psi[i] = Vec3(dist(rng), dist(rng), dist(rng));
    if (u.mesh->is_boundary[i]) {
      const Vec3 eta = sigma.inward_normal(u.pos[i]);
      psi[i] -= psi[i].dot(eta) * eta;
    }
  }
  return psi;
}

SurfaceMap retract(const SurfaceMap& u, std::span<const Vec3> psi, double t,
                   const ImplicitSurface& sigma) {
  SurfaceMap v = u;
  for (int i = 0; i < u.mesh->n_vertices(); ++i) {
    v.pos[i] = u.pos[i] + t * psi[i];
    if (u.mesh->is_boundary[i]) v.pos[i] = closest_point(sigma, v.pos[i]);
  }
  return v;
}

double energy_along(const SurfaceMap& u, std::span<const Vec3> psi, double t,
                    const EnergyParams& params) {
  const SurfaceMap v = retract(u, psi, t, params.sigma);
  HomotopyPath seg;
  seg.mesh = u.mesh;
  seg.beads = {u.pos, v.pos};
  return perturbed_dirichlet(v, params.eps, params.p) + swept_volume(seg, params.f, 0.0);
}

// ---- criterion 1: flat-disk benchmark ----
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto params = unit_ball_params(0.0, 0.0);
  SolveConfig cfg;

  // hopf refinement study from the same noise amplitude, levels 2..4
  std::vector<double> hopfs;
  SurfaceMap solved;
  SolveReport rep;
  for (int level : {2, 3, 4}) {
    auto mesh = mesh_at(level);
    SurfaceMap u0 = flat_map(mesh, params.sigma);
    std::mt19937_64 rng(2026);
    add_tangent_noise(u0, params.sigma, 1e-3, rng);
    auto [u, r] = solve_critical_point(u0, params, cfg);
    hopfs.push_back(r.hopf);
    if (level == 4) {
      solved = std::move(u);
      rep = std::move(r);
    }
  }

  bool hopf_ok = hopfs.back() <= 5e-2;
  std::string hopf_note;
  for (size_t i = 0; i + 1 < hopfs.size(); ++i) {
    const bool ratio_ok = hopfs[i + 1] <= hopfs[i] / 1.7;
    // the discrete flat disk is conformal up to solver noise; defects this
    // far below the 5e-2 requirement carry no rate information
    const bool at_floor = hopfs[i + 1] <= 1e-6;
    if (!ratio_ok && !at_floor) hopf_ok = false;
    if (at_floor && !ratio_ok) hopf_note = " (at solver noise floor, counted as converged)";
  }

  const auto spec = morse_index(assemble_second_variation(solved, params), 12, 0.05);
  const auto spec_t = seconds_since(t0);

  const bool pass = rep.converged && std::abs(rep.D - kPi) <= 0.02 * kPi &&
                    rep.orth_defect <= 1e-3 && hopf_ok && spec.index == kSteklovIndex &&
                    spec.nullity >= 2 && spec_t <= 60.0;
  std::ostringstream os;
  os << "flat disk: D=" << fmt(rep.D) << " (pi +- 2%), orth=" << fmt(rep.orth_defect)
     << " (<=1e-3), hopf=" << fmt(hopfs.back()) << hopf_note << ", index=" << spec.index
     << " (Steklov oracle " << kSteklovIndex << "), nullity=" << spec.nullity
     << " (>=2), runtime=" << fmt(spec_t) << "s (<=60)";
  record(1, pass, os.str());
}

// ---- criteria 2 and 6 share the continuation run ----
void criteria_2_and_6() {
  const auto t0 = std::chrono::steady_clock::now();
  auto mesh = mesh_at(4);
  const auto params = unit_ball_params(1.0, 0.5);
  SolveConfig cfg;
  const auto run = continue_epsilon(cap_map(mesh, 1.0, 1.0), params, cfg);

  const double cap_area = cap_area_oracle(1.0);
  bool pass2 = run.completed && !run.stages.empty();
  std::ostringstream os2;
  if (pass2) {
    const auto& last = run.stages.back();
    const double curv_dev = mean_curvature_deviation(last.map, 1.0);
    EnergyParams limit = params;
    limit.eps = 0.0;
    const auto hersch = hersch_bound_check(last.map, 1.0, params.sigma,
                                           cfg.mesh_tol_C * mesh->mesh_size_h * mesh->mesh_size_h);
    const auto cmp = index_comparison_check(last.map, limit, 12, 0.05);
    const double elapsed = seconds_since(t0);
    pass2 = std::abs(last.report.D - cap_area) <= 0.02 * cap_area && curv_dev <= 0.02 &&
            last.report.max_principle.status == MaxPrincipleStatus::pass_b && hersch.pass &&
            hersch.D <= 16.0 * kPi && cmp.pass && cmp.index_area >= 1 && elapsed <= 600.0;
    os2 << "cap: D=" << fmt(last.report.D) << " (cap area " << fmt(cap_area)
        << " +- 2%), curvature dev=" << fmt(curv_dev) << " (<=2%), max principle "
        << to_string(last.report.max_principle.status) << ", Hersch D<=16pi "
        << (hersch.pass ? "ok" : "violated") << ", index(B_H)=" << cmp.index_area
        << " (>=1) <= index(E)=" << cmp.index_energy << ", runtime=" << fmt(elapsed)
        << "s (<=600)";
  } else {
    os2 << "cap continuation did not complete";
  }
  record(2, pass2, os2.str());

  // criterion 6: confinement across all converged benchmark critical points
  bool pass6 = true;
  std::ostringstream os6;
  {
    const auto p0 = unit_ball_params(0.0, 0.0);
    auto mesh3 = mesh_at(4);
    SurfaceMap u0 = flat_map(mesh3, p0.sigma);
    std::mt19937_64 rng(2026);
    add_tangent_noise(u0, p0.sigma, 1e-3, rng);
    auto [u, r] = solve_critical_point(u0, p0, cfg);
    pass6 = pass6 && r.converged && r.max_principle.status == MaxPrincipleStatus::pass_b;
    os6 << "flat eps=0 " << to_string(r.max_principle.status);
  }
  for (const auto& st : run.stages) {
    if (!st.report.converged) pass6 = false;
    const auto st_status = st.report.max_principle.status;
    if (st.eps > 0.0) {
      if (st_status == MaxPrincipleStatus::fail) pass6 = false;
    } else {
      if (st_status != MaxPrincipleStatus::pass_b) pass6 = false;
    }
  }
  os6 << "; cap stages eps>0 within t0 collar, eps=0 "
      << (run.stages.empty()
              ? "missing"
              : to_string(run.stages.back().report.max_principle.status));
  record(6, pass6, os6.str());
}

// ---- criterion 3: volume quantization ----
void criterion_3() {
  auto mesh = mesh_at(4);
  const auto params = unit_ball_params(1.0, 0.1);
  const double quantum = params.f.integral_inside(params.sigma);
  std::mt19937_64 rng(77);
  const double cap = 0.9 * params.bead_spacing_cap;

  const SurfaceMap target = random_admissible_map(mesh, params.sigma, rng);
  const auto north = constant_map(mesh, Vec3(0, 0, 1));
  const auto south = constant_map(mesh, Vec3(0, 0, -1));
  // one volume quantum, closed at the south constant: the sweepout runs
  // south -> north and returns through constant maps sliding down a
  // meridian of the sphere (zero swept volume)
  HomotopyPath meridian;
  meridian.mesh = mesh;
  const int n_slide = 40;
  for (int s = 0; s <= n_slide; ++s) {
    const double th = kPi * s / n_slide;
    meridian.beads.push_back(
        constant_map(mesh, Vec3(std::sin(th), 0.0, std::cos(th))).pos);
  }
  const auto loop =
      concat(refine_to_spacing(cap_sweepout(mesh, params.sigma, 65), cap, params.sigma),
             refine_to_spacing(meridian, cap, params.sigma));

  bool pass = true;
  double worst = 0.0;
  std::set<long> integers_seen;
  std::uniform_int_distribution<int> kdist(-1, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const SurfaceMap w1 = random_admissible_map(mesh, params.sigma, rng);
    const SurfaceMap w2 = random_admissible_map(mesh, params.sigma, rng);
    const int k = kdist(rng);

    auto path_a = concat(refine_to_spacing(linear_path(north, w1, 3, params.sigma), cap,
                                           params.sigma),
                         refine_to_spacing(linear_path(w1, target, 3, params.sigma), cap,
                                           params.sigma));
    auto path_b = concat(refine_to_spacing(linear_path(south, w2, 3, params.sigma), cap,
                                           params.sigma),
                         refine_to_spacing(linear_path(w2, target, 3, params.sigma), cap,
                                           params.sigma));
    // prepend |k| closed quantum loops at the south constant
    for (int j = 0; j < std::abs(k); ++j)
      path_b = concat(k > 0 ? loop : reversed(loop), path_b);

    const double diff = swept_volume(path_b, params.f, params.bead_spacing_cap) -
                        swept_volume(path_a, params.f, params.bead_spacing_cap);
    const double ratio = diff / quantum;
    const double frac = std::abs(ratio - std::round(ratio));
    worst = std::max(worst, frac);
    integers_seen.insert(std::lround(ratio));
    // route differences must land on integers; the inserted loops shift the
    // base integer by k, so nonzero values are guaranteed to occur
    if (frac > 0.01) pass = false;
  }
  if (integers_seen.size() < 2) pass = false;  // the check must not be vacuous
  std::ostringstream os;
  os << "volume quantization: 20 path pairs, worst |ratio - integer|=" << fmt(worst)
     << " (<=0.01), " << integers_seen.size() << " distinct integers, quantum="
     << fmt(quantum);
  record(3, pass, os.str());
}

// ---- criterion 4: derivative consistency ----
void criterion_4() {
  auto mesh = mesh_at(3);
  const auto params = unit_ball_params(1.0, 0.2);
  std::mt19937_64 rng(2024);

  bool pass = true;
  double worst_fv = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const SurfaceMap u = random_admissible_map(mesh, params.sigma, rng);
    const auto psi = random_admissible_field(u, params.sigma, rng);
    const double analytic = first_variation(u, psi, params);
    const double t = 1e-5;
    const double fd =
        (energy_along(u, psi, t, params) - energy_along(u, psi, -t, params)) / (2.0 * t);
    const double err = std::abs(fd - analytic) / std::max(1.0, std::abs(analytic));
    worst_fv = std::max(worst_fv, err);
    if (err > 1e-6) pass = false;
  }

  // Hessian consistency at critical points (where the constrained second
  // variation is defined), via polarized second differences of the energy
  double worst_hess = 0.0;
  {
    std::vector<std::pair<SurfaceMap, EnergyParams>> points;
    {
      const auto p0 = unit_ball_params(0.0, 0.0);
      points.emplace_back(flat_map(mesh, p0.sigma), p0);
      const auto p1 = unit_ball_params(0.0, 0.3);
      points.emplace_back(flat_map(mesh, p1.sigma), p1);
    }
    {
      const auto pc = unit_ball_params(1.0, 0.1);
      auto [cap, rep] = solve_critical_point(cap_map(mesh, 1.0, 1.0), pc, SolveConfig{});
      if (!rep.converged) pass = false;
      points.emplace_back(std::move(cap), pc);
    }
    int samples = 0;
    for (const auto& [u, pp] : points) {
      const auto sys = assemble_second_variation(u, pp);
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (int s = 0; s < 2 && samples < 5; ++s, ++samples) {
        Eigen::VectorXd x(sys.dofs);
        for (int i = 0; i < sys.dofs; ++i) x[i] = dist(rng);
        const auto field = embed_field(sys, x);
        const double quad = x.dot(sys.A * x);
        const double t = 1e-4;
        const double e0 = energy_along(u, field, 0.0, pp);
        const double fd = (energy_along(u, field, t, pp) - 2.0 * e0 +
                           energy_along(u, field, -t, pp)) /
                          (t * t);
        const double err = std::abs(fd - quad) / std::max(1.0, std::abs(quad));
        worst_hess = std::max(worst_hess, err);
        if (err > 1e-5) pass = false;
      }
    }
  }
  std::ostringstream os;
  os << "derivative consistency: first variation vs FD worst=" << fmt(worst_fv)
     << " (<=1e-6), Hessian vs FD worst=" << fmt(worst_hess) << " (<=1e-5)";
  record(4, pass, os.str());
}

// ---- criterion 5: concentration diagnostics ----
void criterion_5() {
  auto mesh = mesh_at(4);
  SolveConfig cfg;
  const std::vector<double> deltas{0.45, 0.3, 0.2, 0.13, 0.09};
  std::vector<SurfaceMap> bubbles;
  for (double d : deltas) bubbles.push_back(mobius_bubble_map(mesh, 1.0, Vec2(1.0 - d, 0.0)));
  std::vector<std::pair<double, const SurfaceMap*>> seq;
  for (size_t k = 0; k < bubbles.size(); ++k)
    seq.emplace_back(0.05 * deltas[k] * deltas[k], &bubbles[k]);
  const auto rep = detect_concentration(seq, cfg);

  bool pass = rep.detected && rep.entries.size() == deltas.size();
  double prev = 1e300;
  for (const auto& e : rep.entries) {
    if (!e.found || e.t_scale > prev || e.dist_boundary > 2.0 * e.t_scale) pass = false;
    prev = e.t_scale;
  }
  if (!rep.entries.empty() &&
      rep.entries.back().t_scale > 0.5 * rep.entries.front().t_scale)
    pass = false;
  const Vec2 planted(-1.0, 0.0);
  const double center_err =
      rep.entries.empty() ? 1e300 : (rep.entries.back().center - planted).norm();
  if (center_err > 2.0 * mesh->mesh_size_h) pass = false;

  // the flat branch must stay clean
  const auto flat = flat_map(mesh, make_sphere(1.0));
  std::vector<std::pair<double, const SurfaceMap*>> flat_seq{{0.1, &flat}, {0.05, &flat}};
  if (detect_concentration(flat_seq, cfg).detected) pass = false;

  std::ostringstream os;
  os << "concentration: scales " << fmt(rep.entries.front().t_scale) << " -> "
     << fmt(rep.entries.back().t_scale) << " (monotone), center err=" << fmt(center_err)
     << " (<=2h=" << fmt(2.0 * mesh->mesh_size_h) << "), boundary dist <= 2 t_k, flat clean";
  record(5, pass, os.str());
}

// ---- criterion 7: mountain-pass descent ----
void criterion_7() {
  auto mesh = mesh_at(3);
  const auto params = unit_ball_params(1.0, 0.1);
  SolveConfig cfg;
  cfg.minmax_sweeps = 600;

  // perturb the seed away from the analytic cap family so the string has
  // genuine descending to do
  HomotopyPath seed = cap_sweepout(mesh, params.sigma, 33);
  const int nb = seed.n_beads();
  for (int k = 1; k + 1 < nb; ++k) {
    const double bump = 0.25 * std::sin(kPi * k / (nb - 1));
    for (int i = 0; i < mesh->n_vertices(); ++i) {
      const Vec2 x = mesh->vertices[i];
      seed.beads[k][i] += bump * (1.0 - x.squaredNorm()) *
                          Vec3(0.3 * std::sin(2.0 * x.x()), 0.2 * std::cos(x.y()), 0.5);
    }
  }
  const auto res = mountain_pass(seed, params, cfg);

  bool monotone = true;
  for (size_t i = 0; i + 1 < res.omega_history.size(); ++i)
    if (res.omega_history[i + 1] >
        res.omega_history[i] * (1.0 + 1e-7) + 1e-12)
      monotone = false;
  const bool descended = res.omega_history.back() < res.omega_history.front() - 1e-3;

  auto [cap, rep] = solve_critical_point(cap_map(mesh, 1.0, 1.0), params, cfg);
  const double d_slice = dirichlet(res.max_slice);
  const double d_cap = dirichlet(cap);
  const bool match = rep.converged && std::abs(d_slice - d_cap) <= 0.03 * d_cap;

  std::ostringstream os;
  os << "mountain pass: max-slice energy " << fmt(res.omega_history.front()) << " -> "
     << fmt(res.omega_history.back()) << " non-increasing over " << res.sweeps
     << " sweeps, D(slice)=" << fmt(d_slice) << " vs direct-solve D=" << fmt(d_cap)
     << " (within 3%)";
  record(7, monotone && descended && match, os.str());
}

// ---- criterion 8: determinism ----
void criterion_8() {
  namespace fs = std::filesystem;
  auto run_once = [](const fs::path& dir) {
    RunConfig cfg;
    cfg.set("level", "3");
    cfg.set("H", "1.0");
    cfg.set("eps", "0.1");
    cfg.set("init", "cap");
    cfg.set("noise", "1e-3");
    cfg.set("seed", "7");
    fs::remove_all(dir);
    return run_solve(cfg, dir);
  };
  const fs::path base = fs::temp_directory_path() / "cmcdisk_acceptance";
  const int ra = run_once(base / "a");
  const int rb = run_once(base / "b");
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream buf;
    buf << is.rdbuf();
    return buf.str();
  };
  const bool identical = slurp(base / "a" / "summary.json") == slurp(base / "b" / "summary.json");
  std::ostringstream os;
  os << "determinism: two runs with identical config+seed, summary.json "
     << (identical ? "byte-identical" : "differs") << " (exit codes " << ra << "," << rb << ")";
  record(8, ra == 0 && rb == 0 && identical, os.str());
}

}  // namespace

int main() {
  criterion_1();
  criteria_2_and_6();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_7();
  criterion_8();

  int failures = 0;
  for (const auto& c : g_results)
    if (!c.pass) ++failures;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failures,
              g_results.size());
  return failures;
}

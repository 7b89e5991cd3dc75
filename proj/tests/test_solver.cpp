#include "cmcdisk/solver.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace cmcdisk;
constexpr double kPi = std::numbers::pi;

namespace {

std::shared_ptr<const DiskMesh> mesh_at(int level) {
  return std::make_shared<DiskMesh>(build_disk_mesh(level));
}

EnergyParams unit_ball_params(double H, double eps) {
  return make_params(make_sphere(1.0), make_sphere(1.0), 2.0, H, eps);
}

const double kCapArea = 8.0 * kPi * (1.0 - 2.0 / std::sqrt(5.0));

}  // namespace

TEST_CASE("epsilon schedule is geometric with floor and final zero") {
  SolveConfig cfg;
  const auto s = epsilon_schedule(cfg);
  CHECK(s.front() == 0.5);
  CHECK(s.back() == 0.0);
  CHECK(s[s.size() - 2] == doctest::Approx(1e-3));
  for (size_t i = 0; i + 3 < s.size(); ++i) CHECK(s[i + 1] == doctest::Approx(0.5 * s[i]));

  cfg.eps_start = 0.4;
  cfg.eps_floor = 0.4;
  cfg.eps_final_zero = false;
  const auto single = epsilon_schedule(cfg);
  CHECK(single.size() == 1);
  CHECK(single[0] == 0.4);
}

TEST_CASE("flat-disk benchmark: converges from a noisy start") {
  auto mesh = mesh_at(3);
  const auto params = unit_ball_params(0.0, 0.0);
  SurfaceMap u0 = flat_map(mesh, params.sigma);
  std::mt19937_64 rng(17);
  add_tangent_noise(u0, params.sigma, 1e-3, rng);

  SolveConfig cfg;
  auto [u, rep] = solve_critical_point(u0, params, cfg);
  CHECK(rep.converged);
  CHECK(rep.residual_norm <= cfg.grad_tol);
  CHECK(rep.D == doctest::Approx(kPi).epsilon(0.02));
  CHECK(rep.orth_defect <= 1e-3);
  CHECK(rep.boundary_defect <= params.boundary_tol);
  CHECK(rep.classification == "nonconstant critical point");
  CHECK(rep.max_principle.status == MaxPrincipleStatus::pass_b);

  // the tracked local reduction is non-increasing across descent steps
  for (size_t i = 0; i + 1 < rep.history.size(); ++i) {
    if (rep.history[i + 1].step < 0.0) continue;  // Newton rows carry -mu
    CHECK(rep.history[i + 1].energy <= rep.history[i].energy + 1e-12);
  }
}

TEST_CASE("descent phase: tracked energy reduction is non-increasing") {
  auto mesh = mesh_at(2);
  const auto params = unit_ball_params(1.0, 0.2);
  std::mt19937_64 rng(99);
  SurfaceMap u0 = flat_map(mesh, params.sigma);
  add_tangent_noise(u0, params.sigma, 0.3, rng);  // rough start, far from critical

  SolveConfig cfg;
  cfg.newton_switch_tol = 0.0;  // descent only
  cfg.max_iters = 120;
  auto [u, rep] = solve_critical_point(u0, params, cfg);
  CHECK(rep.iterations > 10);
  int descent_rows = 0;
  for (size_t i = 0; i + 1 < rep.history.size(); ++i) {
    if (rep.history[i + 1].step < 0.0) continue;
    CHECK(rep.history[i + 1].energy <= rep.history[i].energy + 1e-12);
    ++descent_rows;
  }
  CHECK(descent_rows > 10);
  CHECK(rep.boundary_defect <= params.boundary_tol);
  // the working value dropped substantially from the rough start
  CHECK(rep.history.back().energy < rep.history.front().energy);

  CHECK_THROWS_AS((void)epsilon_schedule([] {
                    SolveConfig bad;
                    bad.eps_ratio = 1.5;
                    return bad;
                  }()),
                  std::invalid_argument);
}

TEST_CASE("constant start returns immediately, classified constant") {
  auto mesh = mesh_at(2);
  const auto params = unit_ball_params(1.0, 0.2);
  const auto c = constant_map(mesh, Vec3(0, 0, 1));
  auto [u, rep] = solve_critical_point(c, params, SolveConfig{});
  CHECK(rep.converged);
  CHECK(rep.residual_norm == 0.0);
  CHECK(rep.iterations == 0);
  CHECK(rep.classification == "constant-map collapse");
}

TEST_CASE("cap benchmark at eps = 0: Newton converges, curvature within 2%") {
  auto mesh = mesh_at(3);
  const auto params = unit_ball_params(1.0, 0.0);
  const auto cap0 = cap_map(mesh, 1.0, 1.0);
  auto [u, rep] = solve_critical_point(cap0, params, SolveConfig{});
  CHECK(rep.converged);
  CHECK(rep.D == doctest::Approx(kCapArea).epsilon(0.02));
  CHECK(mean_curvature_deviation(u, 1.0) <= 0.02);
  CHECK(rep.max_principle.status == MaxPrincipleStatus::pass_b);
  // level-3 consistency scale; the acceptance suite pins level 4
  CHECK(rep.orth_defect <= 0.05);
  CHECK(rep.boundary_defect <= params.boundary_tol);
}

TEST_CASE("cap hopf defect decreases at first order under refinement") {
  const auto params = unit_ball_params(1.0, 0.0);
  double prev = -1.0;
  for (int level : {3, 4}) {
    auto mesh = mesh_at(level);
    auto [u, rep] = solve_critical_point(cap_map(mesh, 1.0, 1.0), params, SolveConfig{});
    REQUIRE(rep.converged);
    if (prev > 0.0) CHECK(prev / rep.hopf >= 1.7);
    prev = rep.hopf;
  }
}

TEST_CASE("ellipsoid constraint: minimal equatorial disk has D = pi a b") {
  // the z = 0 section of an ellipsoid meets it orthogonally, so it is a
  // free-boundary minimal disk; the critical map is conformal and its
  // Dirichlet energy equals the section area pi a b
  auto mesh = mesh_at(3);
  const double a = 1.2, b = 1.0;
  const auto params = make_params(make_ellipsoid(a, b, 0.9), make_ellipsoid(a, b, 0.9),
                                  /*H0=*/0.9, /*H=*/0.0);
  const auto u0 = flat_map(mesh, params.sigma);
  // the naive chart is not critical on an ellipsoid (u_r is not normal)
  CHECK(residual(u0, params).norm > 1e-2);

  auto [u, rep] = solve_critical_point(u0, params, SolveConfig{});
  CHECK(rep.converged);
  CHECK(rep.D == doctest::Approx(kPi * a * b).epsilon(0.02));
  CHECK(rep.hopf <= 0.05);
  CHECK(rep.boundary_defect <= params.boundary_tol);
  CHECK(rep.max_principle.status == MaxPrincipleStatus::pass_b);
}

TEST_CASE("determinism: identical input and config reproduce bit-identical results") {
  auto mesh = mesh_at(2);
  const auto params = unit_ball_params(1.0, 0.1);
  SurfaceMap u0 = cap_map(mesh, 1.0, 1.0);
  std::mt19937_64 rng(5);
  add_tangent_noise(u0, params.sigma, 1e-3, rng);
  SolveConfig cfg;
  auto [ua, ra] = solve_critical_point(u0, params, cfg);
  auto [ub, rb] = solve_critical_point(u0, params, cfg);
  for (int i = 0; i < mesh->n_vertices(); ++i) CHECK(ua.pos[i] == ub.pos[i]);
  CHECK(ra.residual_norm == rb.residual_norm);
  CHECK(ra.iterations == rb.iterations);
  CHECK(ra.energy == rb.energy);
}

TEST_CASE("epsilon continuation on the flat branch: stages agree to 1e-6") {
  auto mesh = mesh_at(3);
  const auto params = unit_ball_params(0.0, 0.5);
  SurfaceMap u0 = flat_map(mesh, params.sigma);
  std::mt19937_64 rng(23);
  add_tangent_noise(u0, params.sigma, 1e-4, rng);
  SolveConfig cfg;
  cfg.eps_start = 0.5;
  cfg.eps_floor = 0.05;
  const auto run = continue_epsilon(u0, params, cfg);
  CHECK(run.completed);
  for (size_t k = 0; k + 1 < run.stages.size(); ++k) {
    CHECK(run.stages[k].report.converged);
    double drift = 0.0;
    for (int i = 0; i < mesh->n_vertices(); ++i)
      drift = std::max(drift,
                       (run.stages[k + 1].map.pos[i] - run.stages[k].map.pos[i]).norm());
    CHECK(drift <= 1e-6);
  }
}

TEST_CASE("epsilon continuation on the cap branch approaches the cap area monotonically") {
  auto mesh = mesh_at(3);
  const auto params = unit_ball_params(1.0, 0.5);
  const auto cap0 = cap_map(mesh, 1.0, 1.0);
  SolveConfig cfg;
  const auto run = continue_epsilon(cap0, params, cfg);
  CHECK(run.completed);
  REQUIRE(run.stages.size() >= 3);
  // the deviation from the closed-form cap area shrinks monotonically
  for (size_t k = 0; k + 1 < run.stages.size(); ++k)
    CHECK(std::abs(run.stages[k + 1].report.D - kCapArea) <=
          std::abs(run.stages[k].report.D - kCapArea) + 1e-9);
  const auto& last = run.stages.back();
  CHECK(last.eps == 0.0);
  CHECK(last.report.D == doctest::Approx(kCapArea).epsilon(0.02));
  CHECK(last.report.max_principle.status == MaxPrincipleStatus::pass_b);
  // eps > 0 stages are confined within the t0 collar
  for (const auto& st : run.stages)
    CHECK(st.report.max_principle.status != MaxPrincipleStatus::fail);
}

TEST_CASE("schedule of length one equals a direct solve exactly") {
  auto mesh = mesh_at(2);
  const auto params = unit_ball_params(1.0, 0.4);
  const auto cap0 = cap_map(mesh, 1.0, 1.0);
  SolveConfig cfg;
  cfg.eps_start = cfg.eps_floor = 0.4;
  cfg.eps_final_zero = false;
  const auto run = continue_epsilon(cap0, params, cfg);
  REQUIRE(run.stages.size() == 1);
  EnergyParams p4 = params;
  p4.eps = 0.4;
  auto [u, rep] = solve_critical_point(cap0, p4, cfg);
  for (int i = 0; i < mesh->n_vertices(); ++i) CHECK(run.stages[0].map.pos[i] == u.pos[i]);
}

TEST_CASE("max principle: planted violation fails with the right magnitude") {
  auto mesh = mesh_at(3);
  const auto params = unit_ball_params(1.0, 0.1);
  SurfaceMap u = cap_map(mesh, 1.0, 1.0);
  const double t0 = params.barrier.t0;
  // displace one interior vertex to offset distance 2 t0
  int interior = -1;
  for (int i = 0; i < mesh->n_vertices(); ++i)
    if (!mesh->is_boundary[i]) {
      interior = i;
      break;
    }
  u.pos[interior] = Vec3(0, 0, 1.0 + 2.0 * t0);
  const auto mp = check_max_principle(u, params);
  CHECK(mp.status == MaxPrincipleStatus::fail);
  CHECK(mp.max_offset == doctest::Approx(2.0 * t0).epsilon(1e-9));
}

TEST_CASE("mountain pass: descent property, degree check, trivial-path guard") {
  auto mesh = mesh_at(2);
  const auto params = unit_ball_params(1.0, 0.1);
  const auto seed = cap_sweepout(mesh, params.sigma, 21);

  SolveConfig cfg;
  cfg.minmax_sweeps = 60;
  const auto res = mountain_pass(seed, params, cfg);
  CHECK(res.degree == doctest::Approx(1.0).epsilon(0.15));
  // non-increasing up to the plateau acceptance tolerance
  for (size_t i = 0; i + 1 < res.omega_history.size(); ++i)
    CHECK(res.omega_history[i + 1] <=
          res.omega_history[i] * (1.0 + 1e-7) + 1e-12);
  CHECK(dirichlet(res.max_slice) >= cfg.beta_num);

  CHECK_THROWS_AS((void)mountain_pass(reversed(seed), params, cfg), std::invalid_argument);
}

TEST_CASE("mountain pass converges to the direct-solve cap") {
  auto mesh = mesh_at(3);
  const auto params = unit_ball_params(1.0, 0.1);
  const auto seed = cap_sweepout(mesh, params.sigma, 33);
  SolveConfig cfg;
  cfg.minmax_sweeps = 600;
  const auto res = mountain_pass(seed, params, cfg);

  auto [cap, rep] = solve_critical_point(cap_map(mesh, 1.0, 1.0), params, cfg);
  REQUIRE(rep.converged);
  CHECK(dirichlet(res.max_slice) == doctest::Approx(dirichlet(cap)).epsilon(0.03));
  CHECK(res.omega >= rep.Deps - 0.05 * std::abs(rep.Deps));
}

TEST_CASE("monotonicity sweep: omega/r non-increasing, degenerate grid") {
  auto mesh = mesh_at(2);
  const auto params = unit_ball_params(1.0, 0.1);
  SolveConfig cfg;
  cfg.minmax_sweeps = 40;
  cfg.r_grid = {1.0};
  const auto single = monotonicity_sweep(mesh, params, cfg);
  REQUIRE(single.size() == 1);
  CHECK(single[0].ok);

  cfg.r_grid = {0.4, 0.7, 1.0};
  const auto rows = monotonicity_sweep(mesh, params, cfg);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) CHECK(row.ok);
  for (size_t i = 0; i + 1 < rows.size(); ++i)
    CHECK(rows[i + 1].omega_over_r <= rows[i].omega_over_r * (1.0 + 0.02));
  // slopes stay under the locked-in bound on at least 90% of grid points
  int flagged = 0;
  for (const auto& row : rows) flagged += row.flagged ? 1 : 0;
  CHECK(flagged * 10 <= static_cast<int>(rows.size()));
}

TEST_CASE("concentration detection: flat branch clean, Moebius bubbles found") {
  auto mesh = mesh_at(4);
  SolveConfig cfg;

  const auto flat = flat_map(mesh, make_sphere(1.0));
  std::vector<std::pair<double, const SurfaceMap*>> flat_seq{{0.1, &flat}, {0.05, &flat}};
  const auto clean = detect_concentration(flat_seq, cfg);
  CHECK_FALSE(clean.detected);

  // bubbles planted at the boundary point (-1, 0): a_k = (1 - delta_k) e1
  const std::vector<double> deltas{0.45, 0.3, 0.2, 0.13, 0.09};
  std::vector<SurfaceMap> bubbles;
  for (double d : deltas) bubbles.push_back(mobius_bubble_map(mesh, 1.0, Vec2(1.0 - d, 0.0)));
  std::vector<std::pair<double, const SurfaceMap*>> seq;
  for (size_t k = 0; k < bubbles.size(); ++k)
    seq.emplace_back(0.05 * deltas[k] * deltas[k], &bubbles[k]);

  const auto rep = detect_concentration(seq, cfg);
  CHECK(rep.detected);
  REQUIRE(rep.entries.size() == deltas.size());
  double prev = 1e300;
  for (const auto& e : rep.entries) {
    CHECK(e.found);
    CHECK(e.local_energy >= cfg.eta_num / 2.0);
    CHECK(e.t_scale <= prev);
    prev = e.t_scale;
  }
  // scales shrink along the family (radius-grid quantization allows ties)
  CHECK(rep.entries.back().t_scale <= 0.5 * rep.entries.front().t_scale);
  const Vec2 planted(-1.0, 0.0);
  CHECK((rep.entries.back().center - planted).norm() <= 2.0 * mesh->mesh_size_h);
  // boundary bubble: center-to-boundary distance within twice the scale
  for (const auto& e : rep.entries) CHECK(e.dist_boundary <= 2.0 * e.t_scale);
}

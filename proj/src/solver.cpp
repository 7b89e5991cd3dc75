#include "cmcdisk/solver.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cmcdisk {

std::vector<double> epsilon_schedule(const SolveConfig& config) {
  if (!(config.eps_ratio > 0.0 && config.eps_ratio < 1.0))
    throw std::invalid_argument("epsilon schedule: ratio must lie in (0,1)");
  if (!(config.eps_floor > 0.0 && config.eps_start >= config.eps_floor))
    throw std::invalid_argument("epsilon schedule: need eps_start >= eps_floor > 0");
  std::vector<double> eps;
  double e = config.eps_start;
  while (e > config.eps_floor * (1.0 + 1e-12)) {
    eps.push_back(e);
    e *= config.eps_ratio;
  }
  eps.push_back(config.eps_floor);
  if (config.eps_final_zero) eps.push_back(0.0);
  return eps;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::line_search_failure: return "line_search_failure";
    case SolveStatus::newton_stall: return "newton_stall";
  }
  return "unknown";
}

std::string to_string(MaxPrincipleStatus s) {
  switch (s) {
    case MaxPrincipleStatus::pass_b: return "pass_b";
    case MaxPrincipleStatus::pass_a: return "pass_a";
    case MaxPrincipleStatus::fail: return "fail";
  }
  return "unknown";
}

MaxPrincipleResult check_max_principle(const SurfaceMap& u, const EnergyParams& params,
                                       double mesh_tol_C) {
  MaxPrincipleResult out;
  out.t0 = params.barrier.t0;
  out.mesh_tol = mesh_tol_C * u.mesh->mesh_size_h * u.mesh->mesh_size_h;
  double viol = 0.0;
  for (const auto& p : u.pos) viol = std::max(viol, offset_distance(params.barrier, p));
  out.max_offset = viol;
  if (viol <= out.mesh_tol) out.status = MaxPrincipleStatus::pass_b;
  else if (viol <= out.t0 + out.mesh_tol) out.status = MaxPrincipleStatus::pass_a;
  else out.status = MaxPrincipleStatus::fail;
  return out;
}

namespace {

// single straight-line segment volume (no spacing check)
double segment_volume(const SurfaceMap& a, const std::vector<Vec3>& b,
                      const CurvatureField& f) {
  HomotopyPath seg;
  seg.mesh = a.mesh;
  seg.beads = {a.pos, b};
  return swept_volume(seg, f, 0.0);
}

SurfaceMap retract_step(const SurfaceMap& u, const std::vector<Vec3>& dir, double alpha,
                        const ImplicitSurface& sigma) {
  SurfaceMap v = u;
  for (int i = 0; i < u.mesh->n_vertices(); ++i) {
    v.pos[i] = u.pos[i] + alpha * dir[i];
    if (u.mesh->is_boundary[i]) v.pos[i] = closest_point(sigma, v.pos[i]);
  }
  return v;
}

void finish_report(SolveReport& rep, const SurfaceMap& u, const EnergyParams& params,
                   const SolveConfig& config, const Residual& res, double tracked_volume) {
  rep.residual_norm = res.norm;
  rep.orth_defect = res.orth_defect;
  rep.boundary_defect = boundary_defect(u, params.sigma);
  rep.D = dirichlet(u);
  rep.Deps = perturbed_dirichlet(u, params.eps, params.p);
  rep.tracked_volume = tracked_volume;
  rep.energy = rep.Deps + tracked_volume;
  rep.hopf = hopf_defect(u);
  rep.classification =
      rep.D < config.beta_num ? "constant-map collapse" : "nonconstant critical point";
  rep.max_principle = check_max_principle(u, params, config.mesh_tol_C);
}

}  // namespace

std::pair<SurfaceMap, SolveReport> solve_critical_point(const SurfaceMap& u0,
                                                        const EnergyParams& params,
                                                        const SolveConfig& config,
                                                        const CheckpointFn& checkpoint) {
  SurfaceMap u = u0;
  for (int v : u.mesh->boundary_loop)
    if (std::abs(params.sigma.phi(u.pos[v])) > params.boundary_tol)
      u.pos[v] = closest_point(params.sigma, u.pos[v]);

  SolveReport rep;
  Residual res = residual(u, params);
  double tracked_volume = 0.0;
  double work = perturbed_dirichlet(u, params.eps, params.p);
  double alpha = config.init_step;
  rep.history.push_back({0, work, dirichlet(u), res.norm, 0.0, res.orth_defect});

  // descent phase: the tracked local reduction is non-increasing
  int iter = 0;
  while (res.norm > std::max(config.grad_tol, config.newton_switch_tol) &&
         iter < config.max_iters) {
    std::vector<Vec3> dir(u.mesh->n_vertices());
    for (int i = 0; i < u.mesh->n_vertices(); ++i) dir[i] = -res.riesz[i];
    bool accepted = false;
    while (alpha >= config.min_step) {
      const SurfaceMap trial = retract_step(u, dir, alpha, params.sigma);
      const double dv = segment_volume(u, trial.pos, params.f);
      const double wtrial = perturbed_dirichlet(trial, params.eps, params.p) +
                            tracked_volume + dv;
      if (wtrial <= work - config.armijo_c1 * alpha * res.norm * res.norm) {
        u = trial;
        tracked_volume += dv;
        work = wtrial;
        accepted = true;
        break;
      }
      alpha *= config.step_shrink;
    }
    ++iter;
    if (!accepted) {
      rep.status = SolveStatus::line_search_failure;
      break;
    }
    res = residual(u, params);
    rep.history.push_back({iter, work, dirichlet(u), res.norm, alpha, res.orth_defect});
    if (checkpoint && config.checkpoint_every > 0 && iter % config.checkpoint_every == 0)
      checkpoint(iter, u);
    alpha = std::min(alpha * config.step_grow, config.max_step);
  }
  rep.iterations = iter;

  // Gauss-Newton phase on the residual least squares
  // min 0.5 |F(u)|^2_{M^-1}; converges to saddle-type critical points.
  // Levenberg-Marquardt damping is driven by the model-agreement ratio,
  // which keeps steps along soft near-null directions inside the region
  // where the linearization is trustworthy.
  if (res.norm > config.grad_tol && rep.status != SolveStatus::line_search_failure) {
    double mu = 1e-6;
    int nit = 0;
    while (res.norm > config.grad_tol && nit < config.newton_max_iters) {
      const HessianSystem sys = assemble_second_variation(u, params);
      Eigen::VectorXd F(sys.dofs);
      for (int v = 0; v < u.mesh->n_vertices(); ++v) {
        if (sys.dof_count[v] == 3) {
          F.segment<3>(sys.dof_offset[v]) = res.force[v];
        } else {
          F.segment<2>(sys.dof_offset[v]) = sys.frames[v].transpose() * res.force[v];
        }
      }
      const Eigen::VectorXd minv = sys.M.cwiseInverse();
      const Eigen::SparseMatrix<double> AMinvA =
          sys.A * Eigen::SparseMatrix<double>(minv.asDiagonal() * sys.A);
      const Eigen::VectorXd grad = sys.A * (minv.asDiagonal() * F);
      const double scale = sys.norm_estimate();
      bool accepted = false;
      for (int attempt = 0; attempt < 40; ++attempt) {
        Eigen::SparseMatrix<double> lhs = AMinvA;
        for (int i = 0; i < sys.dofs; ++i)
          lhs.coeffRef(i, i) += mu * scale * scale * sys.M[i];
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(lhs);
        if (ldlt.info() == Eigen::Success) {
          const Eigen::VectorXd delta = ldlt.solve(-grad);
          const auto dir = embed_field(sys, delta);
          const SurfaceMap trial = retract_step(u, dir, 1.0, params.sigma);
          const Residual rtrial = residual(trial, params);
          if (rtrial.norm < res.norm) {
            const Eigen::VectorXd lin = F + sys.A * delta;
            const double f0 = res.norm * res.norm;
            const double fpred = lin.dot(minv.asDiagonal() * lin);
            const double ratio =
                (f0 - rtrial.norm * rtrial.norm) / std::max(1e-300, f0 - fpred);
            tracked_volume += segment_volume(u, trial.pos, params.f);
            u = trial;
            res = rtrial;
            if (ratio > 0.75) mu = std::max(mu / 3.0, 1e-16);
            else if (ratio < 0.25) mu *= 4.0;
            accepted = true;
            break;
          }
        }
        mu *= 4.0;
      }
      ++nit;
      work = perturbed_dirichlet(u, params.eps, params.p) + tracked_volume;
      rep.history.push_back(
          {rep.iterations + nit, work, dirichlet(u), res.norm, -mu, res.orth_defect});
      if (checkpoint && config.checkpoint_every > 0 && nit % config.checkpoint_every == 0)
        checkpoint(rep.iterations + nit, u);
      if (!accepted) {
        rep.status = SolveStatus::newton_stall;
        break;
      }
    }
    rep.newton_iterations = nit;
  }

  if (res.norm <= config.grad_tol) {
    rep.converged = true;
    rep.status = SolveStatus::converged;
  } else if (rep.status == SolveStatus::max_iters && rep.newton_iterations > 0) {
    rep.status = SolveStatus::max_iters;
  }
  finish_report(rep, u, params, config, res, tracked_volume);
  return {std::move(u), std::move(rep)};
}

ConcentrationReport detect_concentration(
    std::span<const std::pair<double, const SurfaceMap*>> maps, const SolveConfig& config) {
  ConcentrationReport report;
  if (maps.empty()) return report;
  const DiskMesh& m = *maps.front().second->mesh;
  // quarter-octave radius grid from h to 1/4 (a plain doubling grid is too
  // coarse to resolve scale decay on desk-size meshes)
  std::vector<double> radii;
  for (double r = m.mesh_size_h; r <= 0.25 * (1.0 + 1e-12); r *= std::pow(2.0, 0.25))
    radii.push_back(r);
  if (radii.empty() || radii.back() < 0.25) radii.push_back(0.25);

  for (const auto& [eps, uptr] : maps) {
    const SurfaceMap& u = *uptr;
    const auto g = gradient(m, u.pos);
    std::vector<double> etri(m.n_triangles());
    for (int t = 0; t < m.n_triangles(); ++t)
      etri[t] = 0.5 * m.tri_area[t] * g[t].squaredNorm();

    ConcentrationEntry entry;
    entry.eps = eps;
    double t_scale = -1.0, t_detect = -1.0, scale_energy = 0.0, detect_energy = 0.0;
    Vec2 center = Vec2::Zero();
    for (double r : radii) {
      double best = -1.0;
      Vec2 best_center = Vec2::Zero();
      for (int v = 0; v < m.n_vertices(); ++v) {
        double local = 0.0;
        for (int t = 0; t < m.n_triangles(); ++t)
          if ((m.tri_centroid[t] - m.vertices[v]).norm() <= r) local += etri[t];
        if (local > best) {
          best = local;
          best_center = m.vertices[v];
        }
      }
      if (t_scale < 0.0 && best >= config.eta_num / 3.0) {
        t_scale = r;
        scale_energy = best;
        center = best_center;
      }
      if (t_detect < 0.0 && best >= config.eta_num / 2.0) {
        t_detect = r;
        detect_energy = best;
        center = best_center;
        break;
      }
    }
    entry.found = (t_detect >= 0.0 && t_scale >= 0.0);
    if (entry.found) {
      entry.center = center;
      entry.t_scale = t_scale;
      entry.t_detect = t_detect;
      entry.local_energy = detect_energy;
      entry.scale_energy = scale_energy;
      entry.eps_over_t = eps / t_scale;
      entry.dist_boundary = 1.0 - center.norm();
      report.detected = true;
    }
    report.entries.push_back(entry);
  }
  return report;
}

ContinuationResult continue_epsilon(const SurfaceMap& u0, const EnergyParams& params,
                                    const SolveConfig& config) {
  ContinuationResult out;
  SurfaceMap u = u0;
  for (double eps : epsilon_schedule(config)) {
    EnergyParams stage_params = params;
    stage_params.eps = eps;
    auto [map, rep] = solve_critical_point(u, stage_params, config);
    out.stages.push_back({eps, map, std::move(rep)});
    u = std::move(map);
    if (!out.stages.back().report.converged) {
      std::vector<std::pair<double, const SurfaceMap*>> seq;
      for (const auto& st : out.stages) seq.emplace_back(st.eps, &st.map);
      out.concentration = detect_concentration(seq, config);
      return out;
    }
  }
  out.completed = true;
  return out;
}

MinmaxResult mountain_pass(const HomotopyPath& seed, const EnergyParams& params,
                           const SolveConfig& config) {
  if (seed.n_beads() < 3) throw std::invalid_argument("mountain_pass: too few beads");
  const DiskMesh& m = *seed.mesh;
  auto spread = [&](const std::vector<Vec3>& bead) {
    double s = 0.0;
    for (const auto& p : bead) s = std::max(s, (p - bead.front()).norm());
    return s;
  };
  if (spread(seed.beads.front()) > 1e-12 || spread(seed.beads.back()) > 1e-12)
    throw std::invalid_argument("mountain_pass: endpoints must be constant maps");

  // margin below the cap: boundary re-projection can stretch bead pairs
  HomotopyPath path = refine_to_spacing(seed, 0.9 * params.bead_spacing_cap, params.sigma);

  MinmaxResult out;
  const double quantum = params.f.integral_inside(params.sigma);
  out.degree = quantum != 0.0
                   ? swept_volume(path, params.f, params.bead_spacing_cap) / quantum
                   : 1.0;
  if (quantum != 0.0 && std::abs(out.degree - 1.0) > 0.15)
    throw std::invalid_argument("mountain_pass: seed is not a degree-one sweepout");

  const int n = path.n_beads();
  const auto mass = lumped_vertex_mass(m);

  auto slice_energies = [&](const HomotopyPath& p) {
    std::vector<double> E(p.n_beads());
    SurfaceMap bead{p.mesh, p.beads[0]};
    double vcum = 0.0;
    E[0] = perturbed_dirichlet(bead, params.eps, params.p);
    for (int k = 1; k < p.n_beads(); ++k) {
      SurfaceMap prev{p.mesh, p.beads[k - 1]};
      vcum += segment_volume(prev, p.beads[k], params.f);
      SurfaceMap cur{p.mesh, p.beads[k]};
      E[k] = perturbed_dirichlet(cur, params.eps, params.p) + vcum;
    }
    return E;
  };

  auto reparametrize = [&](HomotopyPath& p) {
    const int nb = p.n_beads();
    std::vector<double> s(nb, 0.0);
    for (int k = 1; k < nb; ++k) {
      double d2 = 0.0;
      for (int i = 0; i < m.n_vertices(); ++i)
        d2 += mass[i] * (p.beads[k][i] - p.beads[k - 1][i]).squaredNorm();
      s[k] = s[k - 1] + std::sqrt(d2);
    }
    if (s.back() <= 0.0) return;
    std::vector<std::vector<Vec3>> fresh(nb);
    fresh[0] = p.beads[0];
    fresh[nb - 1] = p.beads[nb - 1];
    for (int k = 1; k + 1 < nb; ++k) {
      const double target = s.back() * k / (nb - 1);
      int j = 0;
      while (j + 1 < nb - 1 && s[j + 1] < target) ++j;
      const double w = (target - s[j]) / std::max(1e-300, s[j + 1] - s[j]);
      std::vector<Vec3> bead(m.n_vertices());
      for (int i = 0; i < m.n_vertices(); ++i) {
        bead[i] = (1.0 - w) * p.beads[j][i] + w * p.beads[j + 1][i];
        if (m.is_boundary[i]) bead[i] = closest_point(params.sigma, bead[i]);
      }
      fresh[k] = std::move(bead);
    }
    p.beads = std::move(fresh);
  };

  std::vector<double> E = slice_energies(path);
  int kmax = static_cast<int>(std::max_element(E.begin(), E.end()) - E.begin());
  out.omega_history.push_back(E[kmax]);
  double alpha = config.minmax_step;

  int sweep = 0;
  for (; sweep < config.minmax_sweeps; ++sweep) {
    {
      SurfaceMap top{path.mesh, path.beads[kmax]};
      const Residual rtop = residual(top, params);
      out.max_slice_residual = rtop.norm;
      if (dirichlet(top) < config.beta_num)
        throw std::runtime_error("mountain_pass: max slice collapsed below beta (trivial path)");
      if (rtop.norm <= config.minmax_grad_tol) {
        out.converged = true;
        break;
      }
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      HomotopyPath trial = path;
      for (int k = 1; k + 1 < n; ++k) {
        SurfaceMap bead{path.mesh, path.beads[k]};
        const Residual r = residual(bead, params);
        std::vector<Vec3> dir(m.n_vertices());
        for (int i = 0; i < m.n_vertices(); ++i) dir[i] = -r.riesz[i];
        trial.beads[k] = retract_step(bead, dir, alpha, params.sigma).pos;
      }
      reparametrize(trial);
      const std::vector<double> Et = slice_energies(trial);
      const int ktop = static_cast<int>(std::max_element(Et.begin(), Et.end()) - Et.begin());
      // plateau-tolerant: at the pass the max slice cannot drop below omega,
      // but the string still needs to settle through neutral sweeps
      if (Et[ktop] <= out.omega_history.back() * (1.0 + 1e-8) + 1e-12) {
        path = std::move(trial);
        E = Et;
        kmax = ktop;
        out.omega_history.push_back(E[kmax]);
        alpha = std::min(alpha * 1.1, 4.0 * config.minmax_step);
        accepted = true;
      } else {
        alpha *= 0.5;
      }
    }
    if (!accepted) break;  // line search exhausted at the current tolerance
  }
  out.sweeps = sweep;
  out.path = path;
  out.max_slice_index = kmax;
  out.max_slice = SurfaceMap{path.mesh, path.beads[kmax]};
  out.omega = out.omega_history.back();
  {
    const Residual rtop = residual(out.max_slice, params);
    out.max_slice_residual = rtop.norm;
    if (rtop.norm <= config.minmax_grad_tol) out.converged = true;
  }
  return out;
}

std::vector<MonotonicityRow> monotonicity_sweep(std::shared_ptr<const DiskMesh> mesh,
                                                const EnergyParams& params,
                                                const SolveConfig& config) {
  std::vector<MonotonicityRow> rows;
  for (double r : config.r_grid) {
    MonotonicityRow row;
    row.r = r;
    try {
      EnergyParams scaled = params;
      scaled.f = params.f.scaled(r);
      scaled.H = r * params.H;
      const auto seed = cap_sweepout(mesh, params.sigma, config.minmax_beads);
      const auto res = mountain_pass(seed, scaled, config);
      row.omega = res.omega;
      row.omega_over_r = res.omega / r;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  for (size_t i = 0; i + 1 < rows.size(); ++i) {
    if (!rows[i].ok || !rows[i + 1].ok) continue;
    rows[i].slope = -(rows[i + 1].omega_over_r - rows[i].omega_over_r) /
                    (rows[i + 1].r - rows[i].r);
    rows[i].flagged = rows[i].slope > config.slope_bound || rows[i].slope < -0.5;
  }
  return rows;
}

double mean_curvature_deviation(const SurfaceMap& u, double H) {
  const auto fit = osculating_sphere(u, 1);
  return std::abs(fit.mean_curvature - H) / std::abs(H) + fit.sphericity;
}

}  // namespace cmcdisk

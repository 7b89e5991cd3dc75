#pragma once

#include "cmcdisk/energy.hpp"
#include "cmcdisk/spectrum.hpp"

#include <cstdint>
#include <functional>
#include <string>

// Single-threaded deterministic reference implementation: one orchestrator
// drives each iteration and all reductions run in a fixed order, so
// identical configs and seeds reproduce results bit for bit.

namespace cmcdisk {

struct SolveConfig {
  double grad_tol = 1e-8;
  int max_iters = 2000;
  double init_step = 0.5;
  double armijo_c1 = 1e-4;
  double step_grow = 1.3;
  double step_shrink = 0.5;
  double min_step = 1e-14;
  double max_step = 8.0;
  double newton_switch_tol = 5.0;  // enter the Gauss-Newton phase below this residual
  int newton_max_iters = 80;

  double eps_start = 0.5;  // geometric schedule eps_start * eps_ratio^k
  double eps_ratio = 0.5;
  double eps_floor = 1e-3;
  bool eps_final_zero = true;  // append the eps = 0 stage

  int minmax_beads = 33;
  int minmax_sweeps = 400;
  double minmax_step = 0.2;
  double minmax_grad_tol = 2e-3;  // residual target for the max slice

  std::vector<double> r_grid{0.25, 0.5, 0.75, 1.0};
  // flag threshold for -(omega/r)' on the grid; the unit-ball benchmark
  // measures slopes up to ~76 at r = 0.2 (the quantity grows like 1/r^2)
  double slope_bound = 100.0;

  double eta_num = 9.0;    // concentration energy threshold
  double beta_num = 1e-4;  // constant-map collapse threshold on D
  double mesh_tol_C = 4.0;
  double branch_tol = 1e-6;
  int spectrum_k = 12;
  double index_tol = -1.0;

  std::uint64_t seed = 0;
  int checkpoint_every = 0;
};

std::vector<double> epsilon_schedule(const SolveConfig& config);

enum class SolveStatus { converged, max_iters, line_search_failure, newton_stall };
std::string to_string(SolveStatus s);

enum class MaxPrincipleStatus { pass_b, pass_a, fail };
std::string to_string(MaxPrincipleStatus s);

struct MaxPrincipleResult {
  MaxPrincipleStatus status = MaxPrincipleStatus::fail;
  double max_offset = 0.0;  // max over vertices of the barrier offset distance
  double mesh_tol = 0.0;    // C * h^2
  double t0 = 0.0;
};

MaxPrincipleResult check_max_principle(const SurfaceMap& u, const EnergyParams& params,
                                       double mesh_tol_C = 4.0);

struct IterRow {
  int iter;
  double energy;  // working local reduction D_eps + tracked volume
  double D;
  double residual;
  double step;
  double orth_defect;
};

struct SolveReport {
  bool converged = false;
  SolveStatus status = SolveStatus::max_iters;
  int iterations = 0;
  int newton_iterations = 0;
  double residual_norm = 0.0;
  double orth_defect = 0.0;
  double boundary_defect = 0.0;
  double D = 0.0;
  double Deps = 0.0;
  double tracked_volume = 0.0;  // swept volume along the iterate path
  double energy = 0.0;          // Deps + tracked volume (local reduction)
  double hopf = 0.0;
  std::string classification;  // "nonconstant critical point" | "constant-map collapse"
  MaxPrincipleResult max_principle;
  std::vector<IterRow> history;
};

using CheckpointFn = std::function<void(int iter, const SurfaceMap&)>;

/// Projected descent with Armijo line search (the tracked local reduction of
/// the energy is non-increasing across accepted steps), switching to a
/// damped Newton phase on the residual system once the residual is small.
std::pair<SurfaceMap, SolveReport> solve_critical_point(const SurfaceMap& u0,
                                                        const EnergyParams& params,
                                                        const SolveConfig& config,
                                                        const CheckpointFn& checkpoint = {});

struct ContinuationStage {
  double eps = 0.0;
  SurfaceMap map;
  SolveReport report;
};

struct ConcentrationEntry {
  double eps = 0.0;
  bool found = false;
  Vec2 center = Vec2::Zero();
  double t_scale = 0.0;       // smallest dyadic radius holding eta/3
  double t_detect = 0.0;      // smallest dyadic radius holding eta/2
  double local_energy = 0.0;  // energy in the detection ball (>= eta/2 when found)
  double scale_energy = 0.0;  // energy in the t_scale ball
  double eps_over_t = 0.0;
  double dist_boundary = 0.0;
};

struct ConcentrationReport {
  bool detected = false;
  std::vector<ConcentrationEntry> entries;
};

ConcentrationReport detect_concentration(
    std::span<const std::pair<double, const SurfaceMap*>> maps, const SolveConfig& config);

/// Warm-started epsilon continuation ending with the eps = 0 stage. On a
/// stage failure the partial result is returned with the concentration
/// diagnostics attached to the failing stage.
struct ContinuationResult {
  std::vector<ContinuationStage> stages;
  bool completed = false;
  ConcentrationReport concentration;  // filled when a stage fails
};

ContinuationResult continue_epsilon(const SurfaceMap& u0, const EnergyParams& params,
                                    const SolveConfig& config);

struct MinmaxResult {
  HomotopyPath path;
  SurfaceMap max_slice;
  double omega = 0.0;
  int max_slice_index = 0;
  bool converged = false;
  int sweeps = 0;
  double max_slice_residual = 0.0;
  std::vector<double> omega_history;  // non-increasing up to line-search tolerance
  double degree = 0.0;                // swept volume / integral of f
};

/// String-method relaxation of a degree-one sweepout: projected-gradient
/// steps on every interior bead, arc-length reparametrization each sweep,
/// global backtracking on the max-slice energy.
MinmaxResult mountain_pass(const HomotopyPath& seed, const EnergyParams& params,
                           const SolveConfig& config);

struct MonotonicityRow {
  double r = 0.0;
  double omega = 0.0;
  double omega_over_r = 0.0;
  double slope = 0.0;  // -( d/dr )(omega/r), forward difference
  bool flagged = false;
  bool ok = false;
  std::string error;
};

std::vector<MonotonicityRow> monotonicity_sweep(std::shared_ptr<const DiskMesh> mesh,
                                                const EnergyParams& params,
                                                const SolveConfig& config);

/// Relative deviation of the realized mean curvature from H, measured by
/// the osculating-sphere fit of the interior vertices plus its sphericity
/// band (CMC disks in these benchmarks are spherical caps).
double mean_curvature_deviation(const SurfaceMap& u, double H);

}  // namespace cmcdisk

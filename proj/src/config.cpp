#include "cmcdisk/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cmcdisk {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return from_string(buf.str());
}

RunConfig RunConfig::from_string(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: bad section header at line " +
                                    std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected 'key = value' at line " +
                                  std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key at line " +
                                                 std::to_string(lineno));
    cfg.values_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  const std::string v = it == values_.end() ? fallback : it->second;
  resolved_[key] = v;
  return v;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    resolved_[key] = std::to_string(fallback);
    return fallback;
  }
  try {
    const double v = std::stod(it->second);
    resolved_[key] = it->second;
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' has non-numeric value '" +
                                it->second + "'");
  }
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    resolved_[key] = std::to_string(fallback);
    return fallback;
  }
  try {
    const int v = std::stoi(it->second);
    resolved_[key] = it->second;
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' has non-integer value '" +
                                it->second + "'");
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    resolved_[key] = fallback ? "true" : "false";
    return fallback;
  }
  resolved_[key] = it->second;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::invalid_argument("config: key '" + key + "' is not a boolean");
}

std::vector<double> RunConfig::get_doubles(const std::string& key,
                                           const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    std::string echo;
    for (double v : fallback) echo += (echo.empty() ? "" : " ") + std::to_string(v);
    resolved_[key] = echo;
    return fallback;
  }
  std::istringstream is(it->second);
  std::vector<double> vals;
  double v;
  while (is >> v) vals.push_back(v);
  if (vals.empty())
    throw std::invalid_argument("config: key '" + key + "' holds no numbers");
  resolved_[key] = it->second;
  return vals;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [k, v] : resolved_) {
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int RunConfig::level() const { return get_int("level", 4); }

EnergyParams RunConfig::energy_params() const {
  const auto sigma = parse_surface(get_string("surface", "sphere 1"));
  const auto barrier = parse_surface(get_string("barrier", get_string("surface", "sphere 1")));
  double H0_default = 0.0;
  if (barrier.spec.rfind("sphere", 0) == 0) H0_default = 2.0 / barrier.bound_radius;
  const double H0 = get_double("H0", H0_default);
  const double H = get_double("H", 1.0);
  if (H > 0 && H >= H0)
    throw std::invalid_argument("config: requires H < H0 (barrier mean-curvature bound)");
  EnergyParams params = make_params(sigma, barrier, H0, H, get_double("eps", 0.0),
                                    get_double("p", 2.2));
  params.boundary_tol = get_double("boundary_tol", 1e-9);
  params.bead_spacing_cap =
      get_double("bead_spacing_cap", 0.05 * params.sigma.diameter());
  return params;
}

SolveConfig RunConfig::solve_config() const {
  SolveConfig s;
  s.grad_tol = get_double("solver.grad_tol", s.grad_tol);
  s.max_iters = get_int("solver.max_iters", s.max_iters);
  s.init_step = get_double("solver.init_step", s.init_step);
  s.armijo_c1 = get_double("solver.armijo_c1", s.armijo_c1);
  s.step_grow = get_double("solver.step_grow", s.step_grow);
  s.step_shrink = get_double("solver.step_shrink", s.step_shrink);
  s.newton_switch_tol = get_double("solver.newton_switch_tol", s.newton_switch_tol);
  s.newton_max_iters = get_int("solver.newton_max_iters", s.newton_max_iters);
  s.eps_start = get_double("continue.eps_start", s.eps_start);
  s.eps_ratio = get_double("continue.eps_ratio", s.eps_ratio);
  s.eps_floor = get_double("continue.eps_floor", s.eps_floor);
  s.eps_final_zero = get_bool("continue.final_zero", s.eps_final_zero);
  s.minmax_beads = get_int("minmax.beads", s.minmax_beads);
  s.minmax_sweeps = get_int("minmax.sweeps", s.minmax_sweeps);
  s.minmax_step = get_double("minmax.step", s.minmax_step);
  s.minmax_grad_tol = get_double("minmax.grad_tol", s.minmax_grad_tol);
  s.r_grid = get_doubles("minmax.r_grid", s.r_grid);
  s.slope_bound = get_double("minmax.slope_bound", s.slope_bound);
  s.eta_num = get_double("check.eta_num", s.eta_num);
  s.beta_num = get_double("solver.beta_num", s.beta_num);
  s.mesh_tol_C = get_double("check.mesh_tol_C", s.mesh_tol_C);
  s.branch_tol = get_double("spectrum.branch_tol", s.branch_tol);
  s.spectrum_k = get_int("spectrum.k", s.spectrum_k);
  s.index_tol = get_double("spectrum.index_tol", s.index_tol);
  s.seed = static_cast<std::uint64_t>(get_int("seed", 0));
  s.checkpoint_every = get_int("solver.checkpoint_every", s.checkpoint_every);
  return s;
}

}  // namespace cmcdisk

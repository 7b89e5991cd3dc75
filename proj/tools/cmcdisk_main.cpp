#include "cmcdisk/io.hpp"
#include "cmcdisk/pipeline.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <exception>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"free-boundary constant-mean-curvature disk solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", init, surface, barrier;
  double H = -1.0, eps = -1.0, p = -1.0;
  int level = -1, seed = -1;
  std::string export_in, export_format;

  app.add_option("--config", config_path, "configuration file (key = value)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--H", H, "target mean curvature");
  app.add_option("--eps", eps, "perturbation parameter");
  app.add_option("--p", p, "perturbation exponent in (2,3)");
  app.add_option("--level", level, "mesh refinement level");
  app.add_option("--init", init, "initializer: flat | cap | constant | path to .obj");
  app.add_option("--surface", surface, "constraint surface, e.g. 'sphere 1'");
  app.add_option("--barrier", barrier, "barrier surface, e.g. 'sphere 1'");

  auto* sub_solve = app.add_subcommand("solve", "find a critical point");
  auto* sub_continue = app.add_subcommand("continue", "epsilon or H continuation");
  auto* sub_minmax = app.add_subcommand("minmax", "mountain pass + monotonicity sweep");
  auto* sub_spectrum = app.add_subcommand("spectrum", "Morse index of a map");
  auto* sub_check = app.add_subcommand("check", "verification checks on a map");
  auto* sub_export = app.add_subcommand("export", "convert mesh/map formats");
  sub_export->add_option("--in", export_in, "input map .obj (omit to export the mesh)");
  sub_export->add_option("--format", export_format, "obj | vtk");

  for (auto* sub : {sub_solve, sub_continue, sub_minmax, sub_spectrum, sub_check, sub_export})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    cmcdisk::RunConfig cfg;
    if (!config_path.empty()) cfg = cmcdisk::RunConfig::from_file(config_path);
    if (seed >= 0) cfg.set("seed", std::to_string(seed));
    if (H >= 0.0) cfg.set("H", cmcdisk::fmt_double(H));
    if (eps >= 0.0) cfg.set("eps", cmcdisk::fmt_double(eps));
    if (p > 0.0) cfg.set("p", cmcdisk::fmt_double(p));
    if (level >= 0) cfg.set("level", std::to_string(level));
    if (!init.empty()) cfg.set("init", init);
    if (!surface.empty()) cfg.set("surface", surface);
    if (!barrier.empty()) cfg.set("barrier", barrier);
    if (!export_in.empty()) cfg.set("export.in", export_in);
    if (!export_format.empty()) cfg.set("export.format", export_format);

    if (p > 0.0 && p >= 3.0)
      std::fprintf(stderr, "warning: p = %g is outside the supported range (2,3)\n", p);

    std::string name;
    for (auto* sub : {sub_solve, sub_continue, sub_minmax, sub_spectrum, sub_check, sub_export})
      if (sub->parsed()) name = sub->get_name();

    const int code = cmcdisk::run_subcommand(name, cfg, out_dir);
    if (code != 0)
      std::fprintf(stderr, "%s: failed with exit code %d (config hash %s)\n", name.c_str(),
                   code, cfg.hash().c_str());
    return code;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

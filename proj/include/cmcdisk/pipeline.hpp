#pragma once

#include "cmcdisk/config.hpp"

#include <filesystem>

namespace cmcdisk {

// Exit codes shared with the CLI: 0 success, 2 convergence failure,
// 3 configuration error (thrown as std::invalid_argument by the callees).
int run_solve(const RunConfig& cfg, const std::filesystem::path& outdir);
int run_continue(const RunConfig& cfg, const std::filesystem::path& outdir);
int run_minmax(const RunConfig& cfg, const std::filesystem::path& outdir);
int run_spectrum(const RunConfig& cfg, const std::filesystem::path& outdir);
int run_check(const RunConfig& cfg, const std::filesystem::path& outdir);
int run_export(const RunConfig& cfg, const std::filesystem::path& outdir);

int run_subcommand(const std::string& name, const RunConfig& cfg,
                   const std::filesystem::path& outdir);

}  // namespace cmcdisk

#pragma once

// Subcommands of the sparseobs tool. Each cmd_* function runs in memory and
// returns the files it would write; commit() puts them on disk.
//
// Exit codes: 0 success, 1 invalid arguments or model, 2 infeasible design,
// 3 model or output I/O error, 4 numerical failure or unsatisfied
// certificate. A run with exit code 3 leaves no files behind.
//
// Output files (all CSV with a header row; <g> is γ printed with %g):
//   design_<norm>_<g>.csv        sensor, kappa_sq, in_support
//   gain_<norm>_<g>.csv          state, then one column per sensor (L)
//   certificate_<norm>_<g>.csv   norm, target, achieved, satisfied, rel_tol,
//                                accuracy, status
//   trace_<norm>_<g>.csv         iteration, unit_objective, weighted_objective,
//                                support_size, beta_<sensor>..., rho_<sensor>...
//   freq_<norm>_<g>.csv          omega, sigma_max                 (--freq)
//   exhaustive_<norm>_<g>.csv    mask, r, status, l1_of_kappa_sq, sensors
//   exhaustive_design_<norm>_<g>.csv, exhaustive_certificate_<norm>_<g>.csv
//   sim_sparse_<norm>_<g>.csv, sim_full_<norm>_<g>.csv
//                                time, e_1..e_Nx, eps_1..eps_Nz
//   sim_summary_<norm>_<g>.csv   config, sensors, achieved, rms, decay_alpha,
//                                decay_constant, decay_max_ratio, decay_ok
//   sweep_<norm>.csv             c, status, gamma_star, gamma_bound, l1_of_kappa_sq,
//                                kappa_sq_<sensor>...
// gamma_star in the sweep is the certified norm of the resulting error
// system; gamma_bound is the optimised γ variable, which can be loose when
// the penalty is zero.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sparseobs/design.hpp"

namespace sparseobs {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInfeasible = 2,
  kExitIo = 3,
  kExitNumerical = 4,
};

struct RunConfig {
  std::filesystem::path model;
  NormType norm = NormType::H2;
  std::vector<double> gammas;
  /// Empty means unit weights.
  Vector rho;
  std::optional<Vector> kappa_sq_max;
  ReweightOptions reweight;
  std::vector<double> penalties;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 42;
  int threads = 0;

  // design
  int freq_points = 0;

  // simulate
  std::optional<std::vector<int>> support;
  bool zero_noise = false;
  double horizon = 10.0;
  double step = 1e-3;
  double bandwidth = 100.0;
  /// Start of the RMS window; negative means horizon / 2.
  double rms_start = -1.0;
};

struct OutputFile {
  std::string name;
  std::string content;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<OutputFile> files;
  std::vector<std::string> messages;
};

std::string gamma_label(double g);

CommandResult cmd_design(const RunConfig& cfg);
CommandResult cmd_exhaustive(const RunConfig& cfg);
CommandResult cmd_simulate(const RunConfig& cfg);
CommandResult cmd_sweep(const RunConfig& cfg);

/// Writes every file into cfg.out_dir (created if needed). On failure the
/// files already written are removed and IoError is thrown.
void commit(const CommandResult& r, const std::filesystem::path& out_dir);

/// Full command line entry point used by the executable.
int run_cli(int argc, char** argv);

}  // namespace sparseobs

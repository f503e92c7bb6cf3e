#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rbctl/gpr_model.hpp"
#include "rbctl/kernel_model.hpp"
#include "rbctl/mlp_model.hpp"
#include "rbctl/regressor.hpp"

namespace rbctl {

/// Everything one experiment needs. Stored as an INI file; the schema and
/// ranges are listed in docs/formats.md.
struct ExperimentConfig {
  // [problem]
  std::string family = "heat";
  int n_y = 100;
  double final_time = 0.1;
  int steps_per_point = 30;
  /// Damping constant; only the wave family reads it.
  double damping = 10.0;

  // [training]
  /// Grid points per parameter axis. Ignored when train_points is set.
  std::vector<int> train_counts = {8, 8};
  std::vector<Parameter> train_points;

  // [greedy]
  double greedy_tol = 1e-6;
  int max_basis = 50;
  double cg_tol = 1e-12;
  /// Tolerance of the exact solves in the singular value sweep.
  double svd_cg_tol = 1e-12;
  bool reorthogonalize = true;
  bool track_true_errors = false;

  // [test]
  int test_count = 100;
  std::uint64_t test_seed = 20240607;
  bool certify = true;
  bool time_runs = true;

  // [surrogates]
  std::vector<RegressorKind> surrogates = {RegressorKind::mlp, RegressorKind::kernel,
                                           RegressorKind::gpr};
  /// Extra (mu, alpha) pairs from G-ROM solves appended to the training data.
  int enrich_count = 0;
  std::uint64_t enrich_seed = 7;
  KernelSettings kernel{0.1};
  GprSettings gpr;
  MlpSettings mlp;

  // [svd]
  std::vector<double> svd_damping = {0.0, 5.0, 10.0, 100.0};

  // [run]
  std::filesystem::path output_dir = "results";
  /// 0 means all hardware threads.
  int threads = 0;

  /// Throws std::invalid_argument naming the first out-of-range field.
  void validate() const;
  int thread_count() const;
};

/// Defaults for "heat" or "wave" (throws for other names).
ExperimentConfig default_config(const std::string& family);

/// Reads an INI file. Keys that are absent keep the defaults of the family
/// named in [problem]; unknown keys are errors.
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

std::string config_to_string(const ExperimentConfig& config);
ExperimentConfig config_from_string(const std::string& text);

}  // namespace rbctl

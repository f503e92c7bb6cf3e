#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rbctl/config.hpp"
#include "rbctl/greedy_rom.hpp"
#include "rbctl/surrogates.hpp"

namespace rbctl {

/// Name used for the reduced-basis model in reports.
inline constexpr const char* kGromName = "grom";

struct ModelResult {
  double adjoint_error = 0.0;
  std::optional<double> estimated_error;
  double control_error = 0.0;
  double seconds = 0.0;
};

struct TestRow {
  int index = 0;
  Parameter mu;
  double exact_seconds = 0.0;
  int cg_iters = 0;
  /// Same order as RunReport::model_names.
  std::vector<ModelResult> models;
};

struct ModelSummary {
  std::string name;
  double max_adjoint_error = 0.0;
  double avg_adjoint_error = 0.0;
  double max_control_error = 0.0;
  double avg_control_error = 0.0;
  std::optional<double> max_estimated_error;
  std::optional<double> avg_estimated_error;
  double avg_seconds = 0.0;
  /// exact avg seconds / avg seconds; 0 when not timed.
  double speedup = 0.0;
};

struct SvdCurve {
  std::string label;
  std::optional<double> damping;
  std::vector<double> values;
};

struct RunReport {
  std::string family;
  std::vector<GreedyRecord> greedy_history;
  int basis_size = 0;
  bool timed = false;
  std::vector<std::string> model_names;
  std::vector<TestRow> rows;
  std::vector<ModelSummary> summaries;
  double exact_avg_seconds = 0.0;
  std::vector<SvdCurve> singular_values;
  double offline_seconds = 0.0;
  /// Failed invariant assertions; a run is good only if this is empty.
  std::vector<std::string> violations;
  /// Observations that depend on the host (timing order).
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }
  const ModelSummary* summary(const std::string& name) const;
};

ProblemFamily make_family(const ExperimentConfig& config);
ProblemFamily make_family(const ExperimentConfig& config, double damping);
std::vector<Parameter> training_parameters(const ExperimentConfig& config,
                                           const ProblemFamily& family);
/// Random parameters from the box, none equal to a training parameter.
std::vector<Parameter> test_parameters(const ExperimentConfig& config, const ProblemFamily& family);
ExactSolverOptions exact_options(const ExperimentConfig& config);
GreedyOptions greedy_options(const ExperimentConfig& config);

struct OfflineResult {
  GreedyResult greedy;
  double seconds = 0.0;
};

/// Greedy basis construction on the configured training set.
OfflineResult run_offline(const ExperimentConfig& config);

struct SurrogateSet {
  std::vector<std::unique_ptr<CoefficientRegressor>> models;
  std::vector<double> fit_seconds;
};

/// Appends config.enrich_count G-ROM coefficient pairs at random
/// parameters to `data`.
void enrich_training_data(const ExperimentConfig& config, const ProblemFamily& family,
                          const ReducedBasis& basis, TrainingData& data);

/// Fits every model in config.surrogates, in that order.
SurrogateSet train_surrogates(const ExperimentConfig& config, const TrainingData& data);

/// Exact, G-ROM and surrogate solves on the test set; fills rows,
/// summaries, violations and warnings of `report`.
void run_online(const ExperimentConfig& config, const ProblemFamily& family,
                const ReducedBasis& basis, const SurrogateSet& surrogates, RunReport& report);

/// Per-model statistics from report.rows.
void summarize(RunReport& report);

/// Offline, training and online stages with every artifact written to
/// config.output_dir. On failure the stage and message go to an INCOMPLETE
/// marker file in that directory and the exception is rethrown.
RunReport run_experiment(const ExperimentConfig& config);

/// Singular values of the exact final-time adjoints over the training set,
/// one curve per damping value (wave) or a single curve (heat).
std::vector<SvdCurve> run_svd_diagnostic(const ExperimentConfig& config,
                                         const std::vector<double>& damping_list);

/// greedy_results.csv, analysis_results_errors.csv, timings.csv and, when
/// present, singular_values.csv.
void emit_reports(const RunReport& report, const std::filesystem::path& outdir);

/// Wide CSV: k, then one sigma column per curve.
void write_singular_values(const std::vector<SvdCurve>& curves, const std::filesystem::path& path);

/// File names of the stored artifacts inside an output directory.
std::filesystem::path basis_file(const std::filesystem::path& outdir);
std::filesystem::path training_data_file(const std::filesystem::path& outdir);
std::filesystem::path model_file(const std::filesystem::path& outdir, RegressorKind kind);

void write_incomplete_marker(const std::filesystem::path& outdir, const std::string& stage,
                             const std::string& message);
void clear_incomplete_marker(const std::filesystem::path& outdir);

}  // namespace rbctl

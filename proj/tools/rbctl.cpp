// rbctl: offline greedy, surrogate training, online evaluation and
// singular value diagnostics for the heat and wave control benchmarks.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rbctl/basis_io.hpp"
#include "rbctl/errors.hpp"
#include "rbctl/experiment.hpp"

using namespace rbctl;

namespace {

constexpr int kExitViolation = 1;
constexpr int kExitFailure = 2;

// Command line values that override the config file when given.
struct Overrides {
  std::string config_path;
  std::optional<std::string> family;
  std::optional<int> n_y, steps_per_point, max_basis, test_count, enrich_count, threads;
  std::optional<int> kernel_max_centers, gpr_restarts, mlp_restarts, mlp_patience, mlp_max_steps;
  std::optional<double> final_time, damping, greedy_tol, cg_tol, svd_cg_tol;
  std::optional<double> kernel_beta, kernel_lambda, gpr_jitter, mlp_lr;
  std::optional<std::uint64_t> test_seed, seed;
  std::optional<bool> track_true_errors, certify, time_runs, reorthogonalize;
  std::vector<int> train_counts, mlp_hidden;
  std::vector<double> svd_damping;
  std::vector<std::string> surrogates;
  bool no_surrogates = false;
  std::optional<std::string> output_dir;
  std::string write_config;
};

void add_common_options(CLI::App& app, Overrides& o) {
  app.add_option("-c,--config", o.config_path, "INI experiment config")->check(CLI::ExistingFile);
  app.add_option("--family", o.family, "heat or wave")->check(CLI::IsMember({"heat", "wave"}));
  app.add_option("--n-y", o.n_y, "interior grid points");
  app.add_option("--final-time", o.final_time, "final time T");
  app.add_option("--steps-per-point", o.steps_per_point, "time steps per grid point");
  app.add_option("--damping", o.damping, "wave damping constant");
  app.add_option("--train-counts", o.train_counts, "training grid points per axis")->delimiter(',');
  app.add_option("--greedy-tol", o.greedy_tol, "greedy tolerance");
  app.add_option("--max-basis", o.max_basis, "largest admissible basis size");
  app.add_option("--cg-tol", o.cg_tol, "CG tolerance (weighted residual norm)");
  app.add_option("--svd-cg-tol", o.svd_cg_tol, "CG tolerance in svd-diag");
  app.add_option("--reorthogonalize", o.reorthogonalize, "CG residual reorthogonalization");
  app.add_option("--track-true-errors", o.track_true_errors, "exact solves on the training set");
  app.add_option("--test-count", o.test_count, "number of random test parameters");
  app.add_option("--test-seed", o.test_seed, "seed of the test parameters");
  app.add_option("--certify", o.certify, "evaluate the residual estimator online");
  app.add_option("--time-runs", o.time_runs, "time the online solves (single-threaded)");
  app.add_option("--surrogates", o.surrogates, "models among kernel, gpr, mlp")->delimiter(',');
  app.add_flag("--no-surrogates", o.no_surrogates, "G-ROM only");
  app.add_option("--enrich-count", o.enrich_count, "extra G-ROM training pairs");
  app.add_option("--kernel-beta", o.kernel_beta, "Gaussian kernel shape");
  app.add_option("--kernel-lambda", o.kernel_lambda, "kernel regularization");
  app.add_option("--kernel-max-centers", o.kernel_max_centers, "cap on kernel centers (0: none)");
  app.add_option("--gpr-restarts", o.gpr_restarts, "random starts of the GPR search");
  app.add_option("--gpr-jitter", o.gpr_jitter, "GPR diagonal jitter");
  app.add_option("--mlp-hidden", o.mlp_hidden, "hidden layer widths")->delimiter(',');
  app.add_option("--mlp-restarts", o.mlp_restarts, "MLP training restarts");
  app.add_option("--mlp-patience", o.mlp_patience, "early stopping patience");
  app.add_option("--mlp-max-steps", o.mlp_max_steps, "Adam steps per restart");
  app.add_option("--mlp-lr", o.mlp_lr, "Adam learning rate");
  app.add_option("--seed", o.seed, "seed for GPR and MLP training");
  app.add_option("--svd-damping", o.svd_damping, "damping values for svd-diag")->delimiter(',');
  app.add_option("-o,--output-dir", o.output_dir, "artifact directory");
  app.add_option("-j,--threads", o.threads, "worker threads (0: all)");
  app.add_option("--write-config", o.write_config, "save the resolved config to this file");
}

template <class T, class U>
void apply(const std::optional<T>& value, U& target) {
  if (value) target = *value;
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c;
  if (!o.config_path.empty()) {
    c = load_config(o.config_path);
    if (o.family && *o.family != c.family) {
      throw std::invalid_argument("--family " + *o.family + " contradicts the config file (" +
                                  c.family + ")");
    }
  } else {
    c = default_config(o.family.value_or("heat"));
  }
  apply(o.n_y, c.n_y);
  apply(o.final_time, c.final_time);
  apply(o.steps_per_point, c.steps_per_point);
  apply(o.damping, c.damping);
  if (!o.train_counts.empty()) c.train_counts = o.train_counts;
  apply(o.greedy_tol, c.greedy_tol);
  apply(o.max_basis, c.max_basis);
  apply(o.cg_tol, c.cg_tol);
  apply(o.svd_cg_tol, c.svd_cg_tol);
  apply(o.reorthogonalize, c.reorthogonalize);
  apply(o.track_true_errors, c.track_true_errors);
  apply(o.test_count, c.test_count);
  apply(o.test_seed, c.test_seed);
  apply(o.certify, c.certify);
  apply(o.time_runs, c.time_runs);
  if (o.no_surrogates) c.surrogates.clear();
  if (!o.surrogates.empty()) {
    c.surrogates.clear();
    for (const auto& s : o.surrogates) c.surrogates.push_back(regressor_kind_from_string(s));
  }
  apply(o.enrich_count, c.enrich_count);
  apply(o.kernel_beta, c.kernel.beta);
  apply(o.kernel_lambda, c.kernel.lambda);
  apply(o.kernel_max_centers, c.kernel.max_centers);
  apply(o.gpr_restarts, c.gpr.restarts);
  apply(o.gpr_jitter, c.gpr.jitter);
  if (!o.mlp_hidden.empty()) c.mlp.hidden = o.mlp_hidden;
  apply(o.mlp_restarts, c.mlp.restarts);
  apply(o.mlp_patience, c.mlp.patience);
  apply(o.mlp_max_steps, c.mlp.max_steps);
  apply(o.mlp_lr, c.mlp.learning_rate);
  if (o.seed) c.gpr.seed = c.mlp.seed = *o.seed;
  if (!o.svd_damping.empty()) c.svd_damping = o.svd_damping;
  apply(o.output_dir, c.output_dir);
  apply(o.threads, c.threads);
  c.validate();
  if (!o.write_config.empty()) save_config(o.write_config, c);
  return c;
}

void print_greedy(const std::vector<GreedyRecord>& history) {
  std::printf("%5s %14s %14s %8s\n", "N", "est. max err", "true max err", "picked");
  for (const GreedyRecord& r : history) {
    std::printf("%5d %14.4e ", r.basis_size, r.max_estimate);
    if (r.max_true_error) {
      std::printf("%14.4e", *r.max_true_error);
    } else {
      std::printf("%14s", "-");
    }
    std::printf(" %8d\n", r.selected_index);
  }
}

void print_summary(const RunReport& report) {
  std::printf("\n%-8s %11s %11s %11s %11s %11s %11s %9s\n", "model", "max adj", "avg adj",
              "avg est", "max ctl", "avg ctl", "avg s", "speedup");
  if (report.timed && !report.rows.empty()) {
    std::printf("%-8s %11s %11s %11s %11s %11s %11.3e %9.1f\n", "exact", "-", "-", "-", "-", "-",
                report.exact_avg_seconds, 1.0);
  }
  for (const ModelSummary& s : report.summaries) {
    std::printf("%-8s %11.3e %11.3e ", s.name.c_str(), s.max_adjoint_error, s.avg_adjoint_error);
    if (s.avg_estimated_error) {
      std::printf("%11.3e", *s.avg_estimated_error);
    } else {
      std::printf("%11s", "-");
    }
    std::printf(" %11.3e %11.3e %11.3e %9.1f\n", s.max_control_error, s.avg_control_error,
                s.avg_seconds, s.speedup);
  }
}

int finish(const RunReport& report) {
  for (const auto& w : report.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  for (const auto& v : report.violations) std::fprintf(stderr, "VIOLATION: %s\n", v.c_str());
  return report.ok() ? 0 : kExitViolation;
}

int cmd_offline(const ExperimentConfig& c) {
  const auto& dir = c.output_dir;
  std::filesystem::create_directories(dir);
  clear_incomplete_marker(dir);
  save_config(dir / "config.ini", c);
  RunReport report;
  report.family = c.family;
  try {
    const OfflineResult off = run_offline(c);
    report.greedy_history = off.greedy.basis.history;
    report.basis_size = off.greedy.basis.size();
    save_basis(basis_file(dir), off.greedy.basis);
    save_training_data(training_data_file(dir), off.greedy.data);
    emit_reports(report, dir);
    print_greedy(report.greedy_history);
    std::printf("basis size %d after %.2f s\n", report.basis_size, off.seconds);
    // The greedy stops on the largest estimate, so the last record must be below tol.
    if (report.greedy_history.back().max_estimate > c.greedy_tol) {
      report.violations.push_back("greedy finished above its tolerance");
    }
  } catch (const GreedyIncompleteError& e) {
    save_basis(basis_file(dir), e.partial_basis());
    report.greedy_history = e.partial_basis().history;
    emit_reports(report, dir);
    write_incomplete_marker(dir, "offline", e.what());
    print_greedy(report.greedy_history);
    throw;
  } catch (const std::exception& e) {
    write_incomplete_marker(dir, "offline", e.what());
    throw;
  }
  return finish(report);
}

SurrogateSet load_surrogates(const ExperimentConfig& c, const ReducedBasis& basis) {
  SurrogateSet set;
  for (RegressorKind kind : c.surrogates) {
    auto model = load_model(model_file(c.output_dir, kind));
    if (model->kind() != kind) {
      throw IoError(model_file(c.output_dir, kind).string() + " holds a " + to_string(model->kind()) +
                    " model");
    }
    if (model->output_dim() != basis.size()) {
      throw DimensionError(model_file(c.output_dir, kind).string() +
                           " was trained for a different basis size");
    }
    set.models.push_back(std::move(model));
    set.fit_seconds.push_back(0.0);
  }
  return set;
}

int cmd_train(const ExperimentConfig& c) {
  const auto& dir = c.output_dir;
  try {
    const ReducedBasis basis = load_basis(basis_file(dir));
    TrainingData data = load_training_data(training_data_file(dir));
    if (data.basis_size() != basis.size()) {
      throw DimensionError("training data and basis disagree on the basis size");
    }
    enrich_training_data(c, make_family(c), basis, data);
    if (c.enrich_count > 0) save_training_data(dir / "training_data_enriched.csv", data);
    const SurrogateSet set = train_surrogates(c, data);
    RunReport report;
    std::printf("%-8s %10s %14s %14s\n", "model", "fit s", "max coef err", "mean coef err");
    for (std::size_t i = 0; i < set.models.size(); ++i) {
      const CoefficientRegressor& m = *set.models[i];
      save_model(model_file(dir, m.kind()), m);
      const AuditReport audit = ml_error_bound_audit(basis, m, data, basis.tolerance_used);
      std::printf("%-8s %10.3f %14.4e %14.4e\n", to_string(m.kind()).c_str(), set.fit_seconds[i],
                  audit.max_coeff_error, audit.mean_coeff_error);
      if (!audit.shift_within_bound) {
        report.violations.push_back(to_string(m.kind()) + ": adjoint shift exceeds its coefficient bound");
      }
    }
    clear_incomplete_marker(dir);
    return finish(report);
  } catch (const std::exception& e) {
    write_incomplete_marker(dir, "train-surrogates", e.what());
    throw;
  }
}

int cmd_online(const ExperimentConfig& c) {
  const auto& dir = c.output_dir;
  try {
    const ReducedBasis basis = load_basis(basis_file(dir));
    const ProblemFamily family = make_family(c);
    if (basis.family != family.name) {
      throw std::invalid_argument("stored basis belongs to family '" + basis.family + "'");
    }
    const SurrogateSet set = load_surrogates(c, basis);
    RunReport report;
    report.family = c.family;
    report.basis_size = basis.size();
    run_online(c, family, basis, set, report);
    emit_reports(report, dir);
    print_summary(report);
    clear_incomplete_marker(dir);
    return finish(report);
  } catch (const std::exception& e) {
    write_incomplete_marker(dir, "online", e.what());
    throw;
  }
}

int cmd_full(const ExperimentConfig& c) {
  const RunReport report = run_experiment(c);
  print_greedy(report.greedy_history);
  std::printf("basis size %d after %.2f s\n", report.basis_size, report.offline_seconds);
  print_summary(report);
  return finish(report);
}

int cmd_svd(const ExperimentConfig& c) {
  const auto curves = run_svd_diagnostic(c, c.svd_damping);
  std::filesystem::create_directories(c.output_dir);
  write_singular_values(curves, c.output_dir / "singular_values.csv");
  RunReport report;
  for (const SvdCurve& curve : curves) {
    const auto& s = curve.values;
    std::printf("%-10s sigma_1 %.4e", curve.label.c_str(), s.empty() ? 0.0 : s.front());
    for (std::size_t k : {8u, 20u}) {
      if (s.size() >= k) std::printf("  sigma_%zu/sigma_1 %.4e", k, s[k - 1] / s.front());
    }
    std::printf("\n");
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (!(s[k] >= 0.0) || (k > 0 && s[k] > s[k - 1])) {
        report.violations.push_back(curve.label + ": singular values not descending and nonnegative");
        break;
      }
    }
  }
  return finish(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced basis and surrogate solvers for parametrized LQ optimal control"};
  app.require_subcommand(1);
  Overrides o;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const ExperimentConfig&);
  };
  const Sub subs[] = {
      {"offline", "greedy basis construction; writes basis.bin and training_data.csv", cmd_offline},
      {"train-surrogates", "fit the coefficient models on stored training data", cmd_train},
      {"online", "exact, G-ROM and surrogate solves on random test parameters", cmd_online},
      {"full-run", "offline, training and online in one go", cmd_full},
      {"svd-diag", "singular values of exact adjoints over the training set", cmd_svd},
  };
  for (const Sub& s : subs) add_common_options(*app.add_subcommand(s.name, s.help), o);
  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig config = resolve(o);
    for (const Sub& s : subs) {
      if (app.got_subcommand(s.name)) return s.run(config);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}

#include "rbctl/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rbctl/basis_io.hpp"
#include "rbctl/csv.hpp"
#include "rbctl/errors.hpp"
#include "rbctl/parallel.hpp"

namespace rbctl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double control_error(const Trajectory& a, const Trajectory& b) {
  return control_norm_dt(Trajectory{TrajectoryKind::control, a.grid, a.values - b.values});
}

std::string describe(const Parameter& mu) {
  std::ostringstream out;
  out << '(';
  for (Eigen::Index i = 0; i < mu.size(); ++i) out << (i ? ", " : "") << mu[i];
  out << ')';
  return out.str();
}

}  // namespace

const ModelSummary* RunReport::summary(const std::string& name) const {
  for (const ModelSummary& s : summaries) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

ProblemFamily make_family(const ExperimentConfig& config) { return make_family(config, config.damping); }

ProblemFamily make_family(const ExperimentConfig& config, double damping) {
  if (config.family == "heat") {
    return build_heat_family(config.n_y, config.final_time, config.steps_per_point);
  }
  if (config.family == "wave") {
    return build_wave_family(config.n_y, config.final_time, config.steps_per_point, damping);
  }
  throw std::invalid_argument("unknown problem family '" + config.family + "'");
}

std::vector<Parameter> training_parameters(const ExperimentConfig& config,
                                           const ProblemFamily& family) {
  if (config.train_points.empty()) return sample_grid(family.domain, config.train_counts);
  for (const Parameter& mu : config.train_points) {
    if (!family.domain.contains(mu)) {
      throw std::invalid_argument("training parameter " + describe(mu) + " lies outside the box");
    }
  }
  return config.train_points;
}

std::vector<Parameter> test_parameters(const ExperimentConfig& config, const ProblemFamily& family) {
  return sample_random(family.domain, config.test_count, config.test_seed,
                       training_parameters(config, family));
}

ExactSolverOptions exact_options(const ExperimentConfig& config) {
  ExactSolverOptions opts;
  opts.cg_tol = config.cg_tol;
  opts.reorthogonalize = config.reorthogonalize;
  return opts;
}

GreedyOptions greedy_options(const ExperimentConfig& config) {
  GreedyOptions opts;
  opts.tol = config.greedy_tol;
  opts.max_basis = config.max_basis;
  opts.exact = exact_options(config);
  opts.track_true_errors = config.track_true_errors;
  opts.threads = config.thread_count();
  return opts;
}

OfflineResult run_offline(const ExperimentConfig& config) {
  const ProblemFamily family = make_family(config);
  const std::vector<Parameter> train = training_parameters(config, family);
  const auto start = Clock::now();
  OfflineResult out{greedy_offline(family, train, greedy_options(config)), 0.0};
  out.seconds = seconds_since(start);
  return out;
}

void enrich_training_data(const ExperimentConfig& config, const ProblemFamily& family,
                          const ReducedBasis& basis, TrainingData& data) {
  if (config.enrich_count == 0) return;
  const std::vector<Parameter> extra =
      sample_random(family.domain, config.enrich_count, config.enrich_seed, data.params);
  std::vector<Vec> coeffs(extra.size());
  parallel_for(extra.size(), config.thread_count(), [&](std::size_t i) {
    coeffs[i] = project_coefficients(family.build(extra[i]), basis).coeffs;
  });
  for (std::size_t i = 0; i < extra.size(); ++i) {
    data.params.push_back(extra[i]);
    data.coeffs.push_back(std::move(coeffs[i]));
  }
}

SurrogateSet train_surrogates(const ExperimentConfig& config, const TrainingData& data) {
  SurrogateSet out;
  for (RegressorKind kind : config.surrogates) {
    const auto start = Clock::now();
    switch (kind) {
      case RegressorKind::kernel:
        out.models.push_back(std::make_unique<KernelModel>(fit_kernel(data, config.kernel)));
        break;
      case RegressorKind::gpr:
        out.models.push_back(std::make_unique<GPRModel>(fit_gpr(data, config.gpr)));
        break;
      case RegressorKind::mlp:
        out.models.push_back(std::make_unique<MLPModel>(fit_mlp(data, config.mlp)));
        break;
    }
    out.fit_seconds.push_back(seconds_since(start));
  }
  return out;
}

void run_online(const ExperimentConfig& config, const ProblemFamily& family,
                const ReducedBasis& basis, const SurrogateSet& surrogates, RunReport& report) {
  report.model_names = {kGromName};
  for (const auto& m : surrogates.models) report.model_names.push_back(to_string(m->kind()));
  report.timed = config.time_runs;
  const std::vector<Parameter> tests = test_parameters(config, family);
  const ExactSolverOptions exact = exact_options(config);
  const std::size_t n_models = report.model_names.size();

  std::vector<TestRow> rows(tests.size());
  std::vector<double> cg_residuals(tests.size());
  // Timings are only meaningful without competing workers.
  const int threads = config.time_runs ? 1 : config.thread_count();
  parallel_for(tests.size(), threads, [&](std::size_t t) {
    const ProblemInstance inst = family.build(tests[t]);
    TestRow& row = rows[t];
    row.index = static_cast<int>(t);
    row.mu = tests[t];
    row.models.resize(n_models);

    auto start = Clock::now();
    const ExactSolution ref = solve_exact(inst, exact);
    row.exact_seconds = seconds_since(start);
    row.cg_iters = ref.cg_iters;
    cg_residuals[t] = ref.residual_norm;

    start = Clock::now();
    const ReducedSolution grom = rom_online(inst, basis, config.certify);
    ModelResult& g = row.models[0];
    g.seconds = seconds_since(start);
    g.adjoint_error = normw(ref.phiT - grom.phiT_approx, inst.ip());
    g.control_error = control_error(ref.control, grom.control);
    g.estimated_error = grom.estimated_error;

    std::optional<Vec> rhs;
    if (config.certify) rhs = rhs_vector(inst);
    for (std::size_t m = 0; m < surrogates.models.size(); ++m) {
      start = Clock::now();
      const ReducedSolution s =
          surrogate_online(inst, tests[t], basis, *surrogates.models[m], false);
      ModelResult& r = row.models[m + 1];
      r.seconds = seconds_since(start);
      r.adjoint_error = normw(ref.phiT - s.phiT_approx, inst.ip());
      r.control_error = control_error(ref.control, s.control);
      if (config.certify) r.estimated_error = error_estimator(inst, s.phiT_approx, rhs);
    }
  });
  report.rows = std::move(rows);

  for (const TestRow& row : report.rows) {
    for (std::size_t m = 0; m < n_models; ++m) {
      const ModelResult& r = row.models[m];
      const std::string where =
          report.model_names[m] + " at test " + std::to_string(row.index) + " " + describe(row.mu);
      if (!std::isfinite(r.adjoint_error) || !std::isfinite(r.control_error)) {
        report.violations.push_back("non-finite error for " + where);
        continue;
      }
      // The reference itself is only accurate to its CG residual, and the
      // operator's smallest eigenvalue is 1.
      const double slack = cg_residuals[static_cast<std::size_t>(row.index)];
      if (r.estimated_error && r.adjoint_error > *r.estimated_error * (1.0 + 1e-6) + slack) {
        std::ostringstream msg;
        msg << "estimator not reliable for " << where << ": true " << r.adjoint_error
            << " > estimate " << *r.estimated_error;
        report.violations.push_back(msg.str());
      }
    }
  }
  summarize(report);

  if (report.timed && !report.rows.empty()) {
    const ModelSummary* g = report.summary(kGromName);
    if (g->avg_seconds >= report.exact_avg_seconds) {
      report.warnings.push_back("G-ROM online time is not below the exact solve time");
    }
    for (const ModelSummary& s : report.summaries) {
      if (s.name != kGromName && s.avg_seconds >= g->avg_seconds) {
        report.warnings.push_back(s.name + " online time is not below the G-ROM time");
      }
    }
  }
}

void summarize(RunReport& report) {
  report.summaries.clear();
  const double n = static_cast<double>(report.rows.size());
  double exact_total = 0.0;
  for (const TestRow& row : report.rows) exact_total += row.exact_seconds;
  report.exact_avg_seconds = report.rows.empty() ? 0.0 : exact_total / n;
  for (std::size_t m = 0; m < report.model_names.size(); ++m) {
    ModelSummary s;
    s.name = report.model_names[m];
    double adj = 0.0, ctl = 0.0, est = 0.0, secs = 0.0;
    bool all_estimated = !report.rows.empty();
    double max_est = 0.0;
    for (const TestRow& row : report.rows) {
      const ModelResult& r = row.models[m];
      s.max_adjoint_error = std::max(s.max_adjoint_error, r.adjoint_error);
      s.max_control_error = std::max(s.max_control_error, r.control_error);
      adj += r.adjoint_error;
      ctl += r.control_error;
      secs += r.seconds;
      if (r.estimated_error) {
        est += *r.estimated_error;
        max_est = std::max(max_est, *r.estimated_error);
      } else {
        all_estimated = false;
      }
    }
    if (!report.rows.empty()) {
      s.avg_adjoint_error = adj / n;
      s.avg_control_error = ctl / n;
      s.avg_seconds = secs / n;
      if (report.timed && s.avg_seconds > 0.0) s.speedup = report.exact_avg_seconds / s.avg_seconds;
    }
    if (all_estimated) {
      s.max_estimated_error = max_est;
      s.avg_estimated_error = est / n;
    }
    report.summaries.push_back(s);
  }
}

std::filesystem::path basis_file(const std::filesystem::path& outdir) { return outdir / "basis.bin"; }

std::filesystem::path training_data_file(const std::filesystem::path& outdir) {
  return outdir / "training_data.csv";
}

std::filesystem::path model_file(const std::filesystem::path& outdir, RegressorKind kind) {
  return outdir / ("model_" + to_string(kind) + (kind == RegressorKind::mlp ? ".bin" : ".csv"));
}

void write_incomplete_marker(const std::filesystem::path& outdir, const std::string& stage,
                             const std::string& message) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  std::ofstream out(outdir / "INCOMPLETE");
  out << "stage=" << stage << '\n' << "error=" << message << '\n';
}

void clear_incomplete_marker(const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::remove(outdir / "INCOMPLETE", ec);
}

RunReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::filesystem::path& outdir = config.output_dir;
  std::filesystem::create_directories(outdir);
  clear_incomplete_marker(outdir);
  save_config(outdir / "config.ini", config);

  RunReport report;
  report.family = config.family;
  std::string stage = "offline";
  try {
    OfflineResult offline;
    try {
      offline = run_offline(config);
    } catch (const GreedyIncompleteError& e) {
      save_basis(basis_file(outdir), e.partial_basis());
      report.greedy_history = e.partial_basis().history;
      emit_reports(report, outdir);
      throw;
    }
    const ReducedBasis& basis = offline.greedy.basis;
    report.greedy_history = basis.history;
    report.basis_size = basis.size();
    report.offline_seconds = offline.seconds;
    save_basis(basis_file(outdir), basis);
    save_training_data(training_data_file(outdir), offline.greedy.data);

    stage = "train-surrogates";
    const ProblemFamily family = make_family(config);
    TrainingData data = offline.greedy.data;
    enrich_training_data(config, family, basis, data);
    const SurrogateSet surrogates = train_surrogates(config, data);
    for (const auto& m : surrogates.models) save_model(model_file(outdir, m->kind()), *m);

    stage = "online";
    if (config.test_count > 0) run_online(config, family, basis, surrogates, report);
    emit_reports(report, outdir);
  } catch (const std::exception& e) {
    write_incomplete_marker(outdir, stage, e.what());
    throw;
  }
  return report;
}

std::vector<SvdCurve> run_svd_diagnostic(const ExperimentConfig& config,
                                         const std::vector<double>& damping_list) {
  std::vector<std::optional<double>> cases;
  if (config.family == "wave") {
    if (damping_list.empty()) throw std::invalid_argument("run_svd_diagnostic: empty damping list");
    for (double nu : damping_list) cases.emplace_back(nu);
  } else {
    cases.emplace_back(std::nullopt);
  }
  ExactSolverOptions opts = exact_options(config);
  opts.cg_tol = config.svd_cg_tol;

  std::vector<SvdCurve> curves;
  for (const auto& nu : cases) {
    const ProblemFamily family = make_family(config, nu.value_or(config.damping));
    const std::vector<Parameter> train = training_parameters(config, family);
    std::vector<Vec> snapshots(train.size());
    InnerProduct ip;
    parallel_for(train.size(), config.thread_count(), [&](std::size_t i) {
      const ProblemInstance inst = family.build(train[i]);
      snapshots[i] = solve_final_adjoint(inst, rhs_vector(inst), opts).solution;
      if (i == 0) ip = inst.ip();
    });
    SvdCurve curve;
    curve.damping = nu;
    curve.label = nu ? "nu_" + format_double(*nu) : config.family;
    curve.values = svd_singular_values(snapshots, ip);
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace rbctl

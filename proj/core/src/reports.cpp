#include <algorithm>

#include "rbctl/csv.hpp"
#include "rbctl/errors.hpp"
#include "rbctl/experiment.hpp"

namespace rbctl {

namespace {

void write_greedy(const RunReport& report, const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header({"iteration", "basis_size", "estimated_max_error", "true_max_error", "selected_index"});
  for (std::size_t i = 0; i < report.greedy_history.size(); ++i) {
    const GreedyRecord& r = report.greedy_history[i];
    csv.row({std::to_string(i), std::to_string(r.basis_size), format_double(r.max_estimate),
             format_optional(r.max_true_error), std::to_string(r.selected_index)});
  }
}

void write_errors(const RunReport& report, const std::filesystem::path& path) {
  const Eigen::Index p = report.rows.empty() ? 0 : report.rows.front().mu.size();
  std::vector<std::string> header = {"test_index"};
  for (Eigen::Index i = 0; i < p; ++i) header.push_back("mu_" + std::to_string(i));
  for (const std::string& m : report.model_names) {
    header.push_back(m + "_adjoint_error");
    header.push_back(m + "_estimated_error");
    header.push_back(m + "_control_error");
  }
  CsvWriter csv(path);
  csv.header(header);
  for (const TestRow& row : report.rows) {
    std::vector<std::string> fields = {std::to_string(row.index)};
    for (Eigen::Index i = 0; i < p; ++i) fields.push_back(format_double(row.mu[i]));
    for (const ModelResult& r : row.models) {
      fields.push_back(format_double(r.adjoint_error));
      fields.push_back(format_optional(r.estimated_error));
      fields.push_back(format_double(r.control_error));
    }
    csv.row(fields);
  }
}

void write_timings(const RunReport& report, const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header({"model", "avg_seconds", "speedup"});
  if (!report.timed || report.rows.empty()) return;
  csv.row({"exact", format_double(report.exact_avg_seconds), format_double(1.0)});
  for (const ModelSummary& s : report.summaries) {
    csv.row({s.name, format_double(s.avg_seconds), format_double(s.speedup)});
  }
}

void write_summary(const RunReport& report, const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header({"model", "max_adjoint_error", "avg_adjoint_error", "max_estimated_error",
              "avg_estimated_error", "max_control_error", "avg_control_error"});
  for (const ModelSummary& s : report.summaries) {
    csv.row({s.name, format_double(s.max_adjoint_error), format_double(s.avg_adjoint_error),
             format_optional(s.max_estimated_error), format_optional(s.avg_estimated_error),
             format_double(s.max_control_error), format_double(s.avg_control_error)});
  }
}

}  // namespace

void write_singular_values(const std::vector<SvdCurve>& curves, const std::filesystem::path& path) {
  std::vector<std::string> header = {"k"};
  std::size_t length = 0;
  for (const SvdCurve& c : curves) {
    header.push_back("sigma_" + c.label);
    length = std::max(length, c.values.size());
  }
  CsvWriter csv(path);
  csv.header(header);
  for (std::size_t k = 0; k < length; ++k) {
    std::vector<std::string> fields = {std::to_string(k + 1)};
    for (const SvdCurve& c : curves) {
      fields.push_back(k < c.values.size() ? format_double(c.values[k]) : std::string());
    }
    csv.row(fields);
  }
}

void emit_reports(const RunReport& report, const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create output directory " + outdir.string() + ": " + ec.message());
  write_greedy(report, outdir / "greedy_results.csv");
  write_errors(report, outdir / "analysis_results_errors.csv");
  write_timings(report, outdir / "timings.csv");
  write_summary(report, outdir / "summary.csv");
  if (!report.singular_values.empty()) {
    write_singular_values(report.singular_values, outdir / "singular_values.csv");
  }
}

}  // namespace rbctl

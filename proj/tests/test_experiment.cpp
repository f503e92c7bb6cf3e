#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "rbctl/csv.hpp"
#include "rbctl/errors.hpp"
#include "rbctl/experiment.hpp"

using namespace rbctl;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_heat(const fs::path& outdir) {
  ExperimentConfig c = default_config("heat");
  c.n_y = 8;
  c.steps_per_point = 5;
  c.train_counts = {3, 3};
  c.greedy_tol = 1e-6;
  c.test_count = 4;
  c.time_runs = false;
  c.threads = 1;
  c.surrogates = {RegressorKind::kernel, RegressorKind::gpr};
  c.gpr.restarts = 1;
  c.gpr.sweeps = 4;
  c.output_dir = outdir;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rbctl_exp_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Reports, EmptyReportGivesHeaderOnlyFiles) {
  const fs::path dir = scratch("empty");
  fs::create_directories(dir);
  RunReport report;
  report.family = "heat";
  emit_reports(report, dir);
  for (const char* name : {"greedy_results.csv", "analysis_results_errors.csv", "timings.csv"}) {
    const CsvTable t = read_csv(dir / name);
    EXPECT_FALSE(t.header.empty()) << name;
    EXPECT_TRUE(t.rows.empty()) << name;
  }
  fs::remove_all(dir);
}

TEST(Reports, SingularValueColumnsFollowCurves) {
  const fs::path dir = scratch("svd");
  fs::create_directories(dir);
  write_singular_values({{"nu_0", 0.0, {3.0, 2.0, 1.0}}, {"nu_100", 100.0, {5.0, 1e-3}}},
                        dir / "sv.csv");
  const CsvTable t = read_csv(dir / "sv.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"k", "sigma_nu_0", "sigma_nu_100"}));
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[1][2], 1e-3);
  EXPECT_TRUE(std::isnan(t.rows[2][2]));
  fs::remove_all(dir);
}

TEST(Experiment, TestParametersAvoidTrainingSet) {
  const ExperimentConfig c = tiny_heat("unused");
  const ProblemFamily f = make_family(c);
  const auto train = training_parameters(c, f);
  const auto test = test_parameters(c, f);
  EXPECT_EQ(train.size(), 9u);
  ASSERT_EQ(test.size(), 4u);
  for (const auto& mu : test) {
    EXPECT_TRUE(f.domain.contains(mu));
    for (const auto& nu : train) EXPECT_NE(mu, nu);
  }
}

TEST(Experiment, FullRunWritesArtifactsAndIsReproducible) {
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const RunReport ra = run_experiment(tiny_heat(a));
  const RunReport rb = run_experiment(tiny_heat(b));
  EXPECT_TRUE(ra.ok());
  EXPECT_GE(ra.basis_size, 1);
  EXPECT_EQ(ra.rows.size(), 4u);
  EXPECT_EQ(ra.model_names, (std::vector<std::string>{kGromName, "kernel", "gpr"}));
  for (const char* f : {"basis.bin", "training_data.csv", "model_kernel.csv", "model_gpr.csv",
                        "config.ini", "greedy_results.csv", "summary.csv", "timings.csv"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  EXPECT_FALSE(fs::exists(a / "INCOMPLETE"));
  const CsvTable errors = read_csv(a / "analysis_results_errors.csv");
  EXPECT_EQ(errors.rows.size(), 4u);
  EXPECT_EQ(errors.header[0], "test_index");
  EXPECT_NO_THROW(errors.column("grom_estimated_error"));
  EXPECT_EQ(slurp(a / "analysis_results_errors.csv"), slurp(b / "analysis_results_errors.csv"));
  EXPECT_EQ(slurp(a / "greedy_results.csv"), slurp(b / "greedy_results.csv"));

  const ModelSummary* grom = ra.summary(kGromName);
  ASSERT_NE(grom, nullptr);
  for (const TestRow& row : ra.rows) {
    const ModelResult& g = row.models.front();
    EXPECT_LE(g.adjoint_error, grom->max_adjoint_error);
    EXPECT_LE(g.adjoint_error, *g.estimated_error * (1 + 1e-6) + 1e-10);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, IncompleteGreedyLeavesMarkerAndPartialBasis) {
  const fs::path dir = scratch("incomplete");
  ExperimentConfig c = tiny_heat(dir);
  c.greedy_tol = 1e-14;
  c.max_basis = 2;
  EXPECT_THROW(run_experiment(c), GreedyIncompleteError);
  ASSERT_TRUE(fs::exists(dir / "INCOMPLETE"));
  const std::string marker = slurp(dir / "INCOMPLETE");
  EXPECT_NE(marker.find("stage=offline"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "basis.bin"));
  EXPECT_EQ(read_csv(dir / "greedy_results.csv").rows.size(), 3u);

  c.greedy_tol = 1e-6;
  c.max_basis = 50;
  run_experiment(c);
  EXPECT_FALSE(fs::exists(dir / "INCOMPLETE"));
  fs::remove_all(dir);
}

TEST(Experiment, InvalidConfigIsRejectedBeforeAnyWork) {
  const fs::path dir = scratch("invalid");
  ExperimentConfig c = tiny_heat(dir);
  c.test_count = -1;
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
  EXPECT_FALSE(fs::exists(dir));
}

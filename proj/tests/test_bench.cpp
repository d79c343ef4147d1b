#include <gtest/gtest.h>

#include <fstream>

#include "usplit/bench/suite.hpp"

using namespace usplit;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  auto dir = fs::temp_directory_path() / "usplit_bench_test";
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Single-unknown Schrodinger problem: A is the constant potential, so the split is scalar.
fs::path smoke_problem() {
  const auto p = scratch() / "smoke.json";
  write(p, R"({"problem": "schrodinger", "name": "smoke", "shape": [1], "spacing": 1,
               "potential": 2, "source": 1})");
  return p;
}

fs::path small_pantograph() {
  const auto p = scratch() / "pant.json";
  write(p, R"({"problem": "pantograph", "name": "pant", "lambda": 0.5, "t0": 1, "t_end": 3, "dt": 0.02,
               "a": 3, "b": 1, "x0": {"type": "gaussian", "center": 1, "rate": 50}})");
  return p;
}

SuiteCell cell(const std::string& alg, Status s, std::size_t evals) {
  SuiteCell c{"p", alg, "universal", {}, ""};
  c.report.status = s;
  c.report.operator_evals = evals;
  c.report.iterations = evals;
  c.report.residual_history.assign(evals + 1, 1.0);
  return c;
}

}  // namespace

TEST(Suite, ScalarSmokeConverges) {
  SuiteSpec spec;
  spec.problems = {smoke_problem()};
  spec.algorithms = {AlgorithmSpec{Algorithm::fixed_point, 1.0}};
  spec.preconditioners = {PrecondSpec{PrecondKind::universal}};
  const auto r = run_suite(spec);
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_TRUE(r.cells[0].error.empty()) << r.cells[0].error;
  EXPECT_EQ(r.cells[0].report.status, Status::converged);
  EXPECT_EQ(r.cells[0].problem, "smoke");
  EXPECT_EQ(r.cells[0].algorithm, "fp(1.0)");
}

TEST(Suite, UnpreconditionedFixedPointDiverges) {
  SuiteSpec spec;
  spec.problems = {small_pantograph()};
  spec.algorithms = {AlgorithmSpec{Algorithm::fixed_point, 1.0}, AlgorithmSpec{Algorithm::fixed_point, 0.7}};
  spec.preconditioners = {PrecondSpec{PrecondKind::none}, PrecondSpec{PrecondKind::universal}};
  const auto r = run_suite(spec);
  ASSERT_EQ(r.cells.size(), 4u);
  EXPECT_EQ(r.find("pant", "fp(1.0)", "none")->report.status, Status::diverged);
  EXPECT_EQ(r.find("pant", "fp(0.7)", "none")->report.status, Status::diverged);
  EXPECT_EQ(r.find("pant", "fp(1.0)", "universal")->report.status, Status::converged);
}

TEST(Suite, ShiftCellsKeepOuterAndInnerCounts) {
  SuiteSpec spec;
  spec.problems = {small_pantograph()};
  spec.algorithms = {AlgorithmSpec{Algorithm::gmres, 1.0, 20}};
  spec.preconditioners = {PrecondSpec{PrecondKind::shift, 1.0}};
  const auto r = run_suite(spec);
  const auto& rep = r.cells.at(0).report;
  ASSERT_EQ(rep.status, Status::converged) << r.cells[0].error;
  ASSERT_TRUE(rep.outer_iterations && rep.inner_evals);
  EXPECT_GT(*rep.inner_evals, *rep.outer_iterations);
  EXPECT_GE(rep.operator_evals, *rep.inner_evals + *rep.outer_iterations);
  const auto csv = render_table(r, TableFormat::csv);
  EXPECT_NE(csv.find(",outer,"), std::string::npos);
  EXPECT_NE(csv.find(",evals,"), std::string::npos);
}

TEST(Suite, MissingProblemIsConfigErrorAndBadProblemIsRecordedInCell) {
  EXPECT_THROW(parse_suite(json::parse(R"({"problems": ["nope.json"], "algorithms": ["fp"], "preconditioners": ["none"]})"),
                           scratch()),
               ConfigError);
  EXPECT_THROW(parse_suite(json::parse(R"({"problems": [], "algorithms": ["fp"], "preconditioners": ["none"]})")),
               ConfigError);
  const auto bad = scratch() / "bad.json";
  write(bad, R"({"problem": "helmholtz1d", "shape": [8]})");
  SuiteSpec spec;
  spec.problems = {bad};
  spec.algorithms = {AlgorithmSpec{}};
  spec.preconditioners = {PrecondSpec{}};
  const auto r = run_suite(spec);
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_FALSE(r.cells[0].error.empty());
  EXPECT_NE(render_table(r, TableFormat::markdown).find("err"), std::string::npos);
}

TEST(Suite, SuiteFileParsesAlgorithmShorthand) {
  const auto dir = scratch();
  smoke_problem();
  write(dir / "suite.json", R"({"problems": ["smoke.json"], "algorithms": ["fp:0.9", "gmres:5", "bicgstab"],
      "preconditioners": ["none", "universal", {"type": "shift", "gamma": 2}], "tol": 1e-4})");
  const auto s = load_suite_file(dir / "suite.json");
  ASSERT_EQ(s.algorithms.size(), 3u);
  EXPECT_EQ(s.algorithms[0].label(), "fp(0.9)");
  EXPECT_EQ(s.algorithms[1].label(), "gmres(5)");
  EXPECT_EQ(s.preconditioners[2].label(), "shift(2)");
  EXPECT_EQ(s.tol, 1e-4);
}

TEST(Suite, CsvIsDeterministic) {
  SuiteSpec spec;
  spec.problems = {small_pantograph()};
  spec.algorithms = {AlgorithmSpec{Algorithm::fixed_point, 0.8}, AlgorithmSpec{Algorithm::bicgstab}};
  spec.preconditioners = {PrecondSpec{PrecondKind::none}, PrecondSpec{PrecondKind::universal}};
  EXPECT_EQ(render_table(run_suite(spec), TableFormat::csv), render_table(run_suite(spec), TableFormat::csv));
}

TEST(Table, EmptyResultIsHeaderOnly) {
  SuiteResult r;
  r.algorithms = {"fp(1.0)", "bicgstab"};
  EXPECT_EQ(render_table(r, TableFormat::csv), "problem,preconditioner,measure,fp(1.0),bicgstab\n");
  const auto md = render_table(r, TableFormat::markdown);
  EXPECT_EQ(std::count(md.begin(), md.end(), '\n'), 2);
}

TEST(Table, CountSuffixRule) {
  EXPECT_EQ(format_count(6026), "6.0 k");
  EXPECT_EQ(format_count(999), "999");
  EXPECT_EQ(format_count(1250), "1.2 k");
  EXPECT_EQ(format_count(30000), "30.0 k");
  EXPECT_EQ(format_count(2'400'000), "2.4 M");
  EXPECT_EQ(parse_count("6.0 k"), 6000u);
}

TEST(Table, RoundTripRecoversStatusesAndCounts) {
  SuiteResult r;
  r.problems = {"p"};
  r.preconditioners = {"universal"};
  r.algorithms = {"fp(1.0)", "fp(0.9)", "gmres(20)", "gmres(5)", "bicgstab"};
  r.cells = {cell("fp(1.0)", Status::converged, 6026), cell("fp(0.9)", Status::diverged, 12),
             cell("gmres(20)", Status::stagnated, 400), cell("gmres(5)", Status::max_iter, 30000),
             cell("bicgstab", Status::converged, 88)};
  r.cells[4].report.wall_time = 0.1;
  r.cells[0].report.wall_time = 2.0;
  for (auto fmt : {TableFormat::markdown, TableFormat::csv}) {
    const auto text = render_table(r, fmt);
    const auto parsed = parse_table(text);
    ASSERT_EQ(parsed.size(), r.cells.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      EXPECT_EQ(parsed[i].algorithm, r.cells[i].algorithm);
      EXPECT_EQ(parsed[i].status, r.cells[i].report.status);
      if (r.cells[i].report.status == Status::converged) {
        const double n = static_cast<double>(r.cells[i].report.operator_evals);
        EXPECT_LE(std::abs(static_cast<double>(parsed[i].count) - n), n < 1000 ? 0.0 : 50.0);
      }
    }
  }
  EXPECT_NE(render_table(r, TableFormat::markdown).find("**88**"), std::string::npos);
}

TEST(Residuals, HeaderAndOneLinePerEntry) {
  SolverReport rep;
  rep.residual_history = {1.0, 0.5, 1.0 / 3.0};
  const auto path = scratch() / "res.csv";
  dump_residuals(rep, path);
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "iteration,relative_residual");
  EXPECT_EQ(lines[3], "2,3.33333333e-01");
}

TEST(Residuals, FixedPointFileIsNonIncreasing) {
  const auto split = load_problem_file(small_pantograph()).split;
  SolverConfig cfg;
  cfg.tol = 1e-8;
  const auto [x, rep] = fixed_point_solve(build_preconditioned(split), cfg);
  ASSERT_EQ(rep.status, Status::converged);
  const auto path = scratch() / "fp.csv";
  dump_residuals(rep, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  double prev = std::numeric_limits<double>::infinity(), last = 0.0;
  while (std::getline(in, line)) {
    last = std::stod(line.substr(line.find(',') + 1));
    EXPECT_LE(last, prev * (1.0 + 1e-8));
    prev = last;
  }
  EXPECT_LE(last, 1e-8);
}

TEST(Residuals, UnwritablePathIsIoError) {
  SolverReport rep;
  rep.residual_history = {1.0};
  EXPECT_THROW(dump_residuals(rep, "/nonexistent/dir/res.csv"), IoError);
  EXPECT_THROW(dump_residuals(SolverReport{}, scratch() / "x.csv"), InvalidArgument);
}

TEST(Report, JsonMirrorsReportFields) {
  SolverReport rep;
  rep.status = Status::stagnated;
  rep.iterations = 2;
  rep.operator_evals = 4;
  rep.residual_history = {1.0, 0.9, 0.9};
  rep.wall_time = 0.5;
  const auto j = report_json(rep);
  EXPECT_EQ(j.at("status"), "stagnated");
  EXPECT_EQ(j.at("iterations"), 2);
  EXPECT_EQ(j.at("operator_evals"), 4);
  EXPECT_EQ(j.at("residual_history").size(), 3u);
  EXPECT_EQ(j.at("wall_time"), 0.5);
}

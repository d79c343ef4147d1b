#pragma once

#include <atomic>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "usplit/problems/config.hpp"
#include "usplit/solvers/fixed_point.hpp"
#include "usplit/solvers/shift_split.hpp"
#include "usplit/splitting/precision.hpp"

namespace usplit {

/// One column of the comparison table.
struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::fixed_point;
  double alpha = 1.0;
  std::size_t restart = 20;

  std::string label() const {
    char buf[32];
    switch (algorithm) {
      case Algorithm::fixed_point: {
        std::string a = (std::ostringstream() << alpha).str();
        if (a.find_first_of(".e") == std::string::npos) a += ".0";
        return "fp(" + a + ")";
      }
      case Algorithm::gmres: std::snprintf(buf, sizeof buf, "gmres(%zu)", restart); break;
      case Algorithm::bicgstab: std::snprintf(buf, sizeof buf, "bicgstab"); break;
    }
    return buf;
  }
};

enum class PrecondKind { none, universal, shift };

struct PrecondSpec {
  PrecondKind kind = PrecondKind::universal;
  double gamma = 1.0;

  std::string label() const {
    if (kind == PrecondKind::none) return "none";
    if (kind == PrecondKind::universal) return "universal";
    char buf[32];
    std::snprintf(buf, sizeof buf, "shift(%.3g)", gamma);
    return buf;
  }
};

struct SuiteSpec {
  std::vector<std::filesystem::path> problems;
  std::vector<AlgorithmSpec> algorithms;
  std::vector<PrecondSpec> preconditioners;
  double tol = 1e-3;
  std::size_t max_iter = 30000;
  /// Inner tolerance of shift-splitting runs.
  double inner_tol = 1e-4;
  std::size_t threads = 1;
  Precision precision = Precision::double_precision;
};

struct SuiteCell {
  std::string problem;
  std::string algorithm;
  std::string preconditioner;
  SolverReport report;
  /// Non-empty when the cell could not run; the report is then meaningless.
  std::string error;
};

/// Cells in problem-major, then preconditioner, then algorithm order.
struct SuiteResult {
  std::vector<std::string> problems;
  std::vector<std::string> algorithms;
  std::vector<std::string> preconditioners;
  std::vector<SuiteCell> cells;

  const SuiteCell* find(const std::string& p, const std::string& a, const std::string& pc) const {
    for (const auto& c : cells)
      if (c.problem == p && c.algorithm == a && c.preconditioner == pc) return &c;
    return nullptr;
  }
};

inline AlgorithmSpec parse_algorithm(const json& j) {
  AlgorithmSpec a;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    const auto colon = s.find(':');
    a.algorithm = algorithm_from_string(s.substr(0, colon));
    if (colon != std::string::npos) {
      const double v = std::stod(s.substr(colon + 1));
      if (a.algorithm == Algorithm::fixed_point)
        a.alpha = v;
      else if (a.algorithm == Algorithm::gmres)
        a.restart = static_cast<std::size_t>(v);
    }
    return a;
  }
  a.algorithm = algorithm_from_string(config::require(j, "algorithm", "algorithm").get<std::string>());
  a.alpha = j.value("alpha", 1.0);
  a.restart = j.value("restart", std::size_t{20});
  return a;
}

inline PrecondSpec parse_precond(const json& j) {
  PrecondSpec p;
  const std::string s = j.is_string() ? j.get<std::string>() : config::require(j, "type", "preconditioner").get<std::string>();
  if (s == "none")
    p.kind = PrecondKind::none;
  else if (s == "universal")
    p.kind = PrecondKind::universal;
  else if (s == "shift") {
    p.kind = PrecondKind::shift;
    if (j.is_object()) p.gamma = j.value("gamma", 1.0);
  } else
    throw ConfigError("unknown preconditioner: " + s);
  if (!(p.gamma > 0.0)) throw ConfigError("shift gamma must be positive");
  return p;
}

/// Suite file: {"problems": [...], "algorithms": ["fp:1.0", "gmres:20", "bicgstab", ...],
/// "preconditioners": ["none", "universal", {"type": "shift", "gamma": 1}], "tol", "max_iter",
/// "inner_tol", "threads", "precision": "double" | "single"}. Problem paths resolve against
/// the suite file's directory.
inline SuiteSpec parse_suite(const json& j, const std::filesystem::path& base = ".") {
  SuiteSpec s;
  try {
    for (const auto& p : config::require(j, "problems", "suite")) {
      const auto path = base / p.get<std::string>();
      if (!std::filesystem::exists(path)) throw ConfigError("suite: problem file not found: " + path.string());
      s.problems.push_back(path);
    }
    for (const auto& a : config::require(j, "algorithms", "suite")) s.algorithms.push_back(parse_algorithm(a));
    for (const auto& p : config::require(j, "preconditioners", "suite")) s.preconditioners.push_back(parse_precond(p));
    s.tol = j.value("tol", s.tol);
    s.max_iter = j.value("max_iter", s.max_iter);
    s.inner_tol = j.value("inner_tol", s.inner_tol);
    s.threads = std::max<std::size_t>(1, j.value("threads", s.threads));
    s.precision = precision_from_string(j.value("precision", std::string("double")));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed suite: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ConfigError("malformed algorithm parameter in suite");
  }
  if (s.problems.empty() || s.algorithms.empty() || s.preconditioners.empty())
    throw ConfigError("suite: problems, algorithms and preconditioners must be non-empty");
  if (!(s.tol > 0.0) || s.max_iter < 1) throw ConfigError("suite: tol and max_iter must be positive");
  return s;
}

inline SuiteSpec load_suite_file(const std::filesystem::path& path) {
  return parse_suite(read_json_file(path), path.parent_path());
}

/// Solve one problem with one algorithm and preconditioner. The returned report always has
/// raw_residual set to ||A x - b|| / ||b|| of the canonical system.
inline SolverReport run_cell(const SplitSystem& problem, const AlgorithmSpec& alg, const PrecondSpec& pc,
                             SolverConfig cfg, double inner_tol = 1e-4) {
  cfg.restart = alg.algorithm == Algorithm::gmres ? std::optional(alg.restart) : std::nullopt;
  cfg.alpha = alg.alpha;
  const LinearMap A = problem.forward();
  switch (pc.kind) {
    case PrecondKind::none: {
      auto [x, rep] = solve_linear(alg.algorithm, A, problem.source, cfg);
      rep.raw_residual = detail::relative_residual(A, x, problem.source);
      return rep;
    }
    case PrecondKind::universal: {
      SplitSystem split = problem;
      if (alg.algorithm == Algorithm::fixed_point) split.alpha = alg.alpha;
      const auto pre = build_preconditioned(split);
      if (alg.algorithm == Algorithm::fixed_point) return fixed_point_solve(pre, cfg).second;
      auto [x, rep] = solve_linear(alg.algorithm, pre.precond_op, pre.precond_source, cfg);
      rep.raw_residual = raw_relative_residual(split, x);
      return rep;
    }
    case PrecondKind::shift: {
      ShiftConfig sc;
      sc.gamma = pc.gamma;
      sc.inner.tol = inner_tol;
      sc.inner.max_iter = cfg.max_iter;
      const auto inner = build_preconditioned(shifted_split(problem, pc.gamma));
      return shift_split_solve(A, problem.source, sc, alg.algorithm, cfg, inner).second;
    }
  }
  throw InvalidArgument("run_cell: unknown preconditioner");
}

/// Run every (problem, preconditioner, algorithm) cell. Problem-load and per-cell failures
/// are recorded in the affected cells.
inline SuiteResult run_suite(const SuiteSpec& spec) {
  SuiteResult out;
  for (const auto& a : spec.algorithms) out.algorithms.push_back(a.label());
  for (const auto& p : spec.preconditioners) out.preconditioners.push_back(p.label());

  struct Task {
    std::size_t problem, precond, algorithm;
  };
  std::vector<std::optional<LoadedProblem>> loaded;
  std::vector<std::string> load_errors;
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < spec.problems.size(); ++i) {
    std::string name = spec.problems[i].stem().string(), err;
    std::optional<LoadedProblem> lp;
    try {
      lp = load_problem_file(spec.problems[i]);
      if (spec.precision == Precision::single_precision) lp->split = emulate_single_precision(lp->split);
      name = lp->name;
    } catch (const Error& e) {
      err = e.what();
    }
    out.problems.push_back(name);
    loaded.push_back(std::move(lp));
    load_errors.push_back(err);
    for (std::size_t p = 0; p < spec.preconditioners.size(); ++p)
      for (std::size_t a = 0; a < spec.algorithms.size(); ++a) {
        tasks.push_back({i, p, a});
        out.cells.push_back({name, out.algorithms[a], out.preconditioners[p], {}, err});
      }
  }

  SolverConfig cfg;
  cfg.tol = spec.tol;
  cfg.max_iter = spec.max_iter;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < tasks.size();) {
      const auto& t = tasks[k];
      if (!loaded[t.problem]) continue;
      try {
        out.cells[k].report = run_cell(loaded[t.problem]->split, spec.algorithms[t.algorithm],
                                       spec.preconditioners[t.precond], cfg, spec.inner_tol);
      } catch (const std::exception& e) {
        out.cells[k].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < std::min(spec.threads, tasks.size()); ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

enum class TableFormat { markdown, csv };

/// Count with the table suffix rule: below 1000 as an integer, then one decimal with k or M.
inline std::string format_count(std::size_t n) {
  char buf[32];
  if (n < 1000)
    std::snprintf(buf, sizeof buf, "%zu", n);
  else if (n < 999950)
    std::snprintf(buf, sizeof buf, "%.1f k", static_cast<double>(n) / 1e3);
  else
    std::snprintf(buf, sizeof buf, "%.1f M", static_cast<double>(n) / 1e6);
  return buf;
}

/// Inverse of format_count up to its rounding.
inline std::size_t parse_count(const std::string& s) {
  const double v = std::stod(s);
  if (s.find('M') != std::string::npos) return static_cast<std::size_t>(std::llround(v * 1e6));
  if (s.find('k') != std::string::npos) return static_cast<std::size_t>(std::llround(v * 1e3));
  return static_cast<std::size_t>(std::llround(v));
}

namespace detail {

/// Rendered rows: one per (problem, preconditioner); shift preconditioners add a row of outer
/// steps next to the row of total evaluations.
struct TableRow {
  std::string problem, precond, measure;
  std::vector<const SuiteCell*> cells;
};

inline std::vector<TableRow> table_rows(const SuiteResult& r) {
  std::vector<TableRow> rows;
  for (const auto& p : r.problems)
    for (const auto& pc : r.preconditioners) {
      const bool shift = pc.rfind("shift", 0) == 0;
      std::vector<const SuiteCell*> cells;
      for (const auto& a : r.algorithms) cells.push_back(r.find(p, a, pc));
      if (shift) rows.push_back({p, pc, "outer", cells});
      rows.push_back({p, pc, "evals", cells});
    }
  return rows;
}

inline std::string cell_text(const SuiteCell* c, const std::string& measure) {
  if (!c || !c->error.empty()) return "err";
  if (c->report.status != Status::converged) return std::string(1, status_letter(c->report.status));
  const std::size_t n = measure == "outer" ? c->report.outer_iterations.value_or(c->report.iterations)
                                           : c->report.operator_evals;
  return format_count(n);
}

}  // namespace detail

/// Operator-evaluation counts per cell (outer steps on the extra shift rows), letters s/m/d
/// for failed runs and "err" for cells that could not run. Markdown marks the fastest
/// converged cell of each row in bold; CSV carries no timing and is deterministic.
inline std::string render_table(const SuiteResult& r, TableFormat fmt) {
  std::ostringstream os;
  const auto rows = detail::table_rows(r);
  if (fmt == TableFormat::csv) {
    os << "problem,preconditioner,measure";
    for (const auto& a : r.algorithms) os << ',' << a;
    os << '\n';
    for (const auto& row : rows) {
      os << row.problem << ',' << row.precond << ',' << row.measure;
      for (const auto* c : row.cells) os << ',' << detail::cell_text(c, row.measure);
      os << '\n';
    }
    return os.str();
  }
  os << "| problem | preconditioner | measure |";
  for (const auto& a : r.algorithms) os << ' ' << a << " |";
  os << "\n|---|---|---|";
  for (std::size_t i = 0; i < r.algorithms.size(); ++i) os << "---|";
  os << '\n';
  for (const auto& row : rows) {
    const SuiteCell* fastest = nullptr;
    for (const auto* c : row.cells)
      if (c && c->error.empty() && c->report.status == Status::converged &&
          (!fastest || c->report.wall_time < fastest->report.wall_time))
        fastest = c;
    os << "| " << row.problem << " | " << row.precond << " | " << row.measure << " |";
    for (const auto* c : row.cells) {
      const auto text = detail::cell_text(c, row.measure);
      os << ' ' << (c == fastest ? "**" + text + "**" : text) << " |";
    }
    os << '\n';
  }
  return os.str();
}

/// Parsed table cell: status letter or converged count.
struct ParsedCell {
  std::string problem, preconditioner, measure, algorithm;
  std::optional<Status> status;  // empty for "err"
  std::size_t count = 0;
};

/// Parse either rendered format back into cells.
inline std::vector<ParsedCell> parse_table(const std::string& text) {
  std::vector<ParsedCell> out;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  auto split = [](const std::string& l, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : l) {
      if (ch == sep) {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
    for (auto& p : parts) {
      const auto b = p.find_first_not_of(" *"), e = p.find_last_not_of(" *");
      p = b == std::string::npos ? "" : p.substr(b, e - b + 1);
    }
    return parts;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line.rfind("|---", 0) == 0) continue;
    const bool md = line[0] == '|';
    auto parts = split(md ? line.substr(1, line.size() - 2) : line, md ? '|' : ',');
    if (header.empty()) {
      header = parts;
      continue;
    }
    for (std::size_t i = 3; i < parts.size() && i < header.size(); ++i) {
      ParsedCell c{parts[0], parts[1], parts[2], header[i], std::nullopt, 0};
      const auto& t = parts[i];
      if (t == "d")
        c.status = Status::diverged;
      else if (t == "s")
        c.status = Status::stagnated;
      else if (t == "m")
        c.status = Status::max_iter;
      else if (t != "err") {
        c.status = Status::converged;
        c.count = parse_count(t);
      }
      out.push_back(c);
    }
  }
  return out;
}

/// Header plus one "index,residual" line per history entry, residuals with 9 significant digits.
inline void dump_residuals(const SolverReport& report, const std::filesystem::path& path) {
  if (report.residual_history.empty()) throw InvalidArgument("dump_residuals: empty residual history");
  std::ofstream out(path);
  if (!out) throw IoError("dump_residuals: cannot write " + path.string());
  out << "iteration,relative_residual\n";
  char buf[64];
  for (std::size_t i = 0; i < report.residual_history.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.8e\n", i, report.residual_history[i]);
    out << buf;
  }
  out.flush();
  if (!out) throw IoError("dump_residuals: write failed for " + path.string());
}

inline json report_json(const SolverReport& r) {
  json j{{"status", to_string(r.status)},
         {"iterations", r.iterations},
         {"operator_evals", r.operator_evals},
         {"residual_history", r.residual_history},
         {"wall_time", r.wall_time}};
  j["raw_residual"] = r.raw_residual ? json(*r.raw_residual) : json(nullptr);
  if (r.outer_iterations) j["outer_iterations"] = *r.outer_iterations;
  if (r.inner_evals) j["inner_evals"] = *r.inner_evals;
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

}  // namespace usplit

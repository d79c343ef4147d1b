#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "usplit/core/error.hpp"

namespace usplit {

enum class Status { converged, diverged, stagnated, max_iter };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::converged: return "converged";
    case Status::diverged: return "diverged";
    case Status::stagnated: return "stagnated";
    case Status::max_iter: return "max_iter";
  }
  return "unknown";
}

/// Table letter for a failed run.
inline char status_letter(Status s) {
  switch (s) {
    case Status::diverged: return 'd';
    case Status::stagnated: return 's';
    case Status::max_iter: return 'm';
    default: return 'c';
  }
}

inline Status status_from_string(std::string_view s) {
  if (s == "converged") return Status::converged;
  if (s == "diverged") return Status::diverged;
  if (s == "stagnated") return Status::stagnated;
  if (s == "max_iter") return Status::max_iter;
  throw InvalidArgument("unknown status: " + std::string(s));
}

enum class Algorithm { fixed_point, gmres, bicgstab };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::fixed_point: return "fp";
    case Algorithm::gmres: return "gmres";
    case Algorithm::bicgstab: return "bicgstab";
  }
  return "unknown";
}

inline Algorithm algorithm_from_string(std::string_view s) {
  if (s == "fp") return Algorithm::fixed_point;
  if (s == "gmres") return Algorithm::gmres;
  if (s == "bicgstab") return Algorithm::bicgstab;
  throw ConfigError("unknown algorithm: " + std::string(s));
}

struct SolverConfig {
  double tol = 1e-3;
  /// Budget on operator evaluations.
  std::size_t max_iter = 30000;
  double alpha = 1.0;
  std::optional<std::size_t> restart;
  double divergence_factor = 1e6;
  std::size_t stagnation_window = 50;
  double stagnation_eps = 1e-8;

  void validate() const {
    if (!(tol > 0.0)) throw InvalidArgument("SolverConfig: tol must be positive");
    if (max_iter < 1) throw InvalidArgument("SolverConfig: max_iter must be at least 1");
    if (restart && *restart < 1) throw InvalidArgument("SolverConfig: restart must be at least 1");
    if (!(alpha > 0.0)) throw InvalidArgument("SolverConfig: alpha must be positive");
    if (!(divergence_factor > 1.0)) throw InvalidArgument("SolverConfig: divergence_factor must exceed 1");
    if (stagnation_window < 1) throw InvalidArgument("SolverConfig: stagnation_window must be at least 1");
  }
};

struct SolverReport {
  Status status = Status::max_iter;
  std::size_t iterations = 0;
  std::size_t operator_evals = 0;
  std::vector<double> residual_history;
  double wall_time = 0.0;
  /// ||A x - b|| / ||b|| of the physical system at termination, when measured.
  std::optional<double> raw_residual;
  /// Shift-splitting runs: outer steps and the inner evaluations they triggered.
  std::optional<std::size_t> outer_iterations;
  std::optional<std::size_t> inner_evals;
  std::string message;
};

namespace detail {

/// Termination test on a running history. `evals_used` is the evaluation count so far and
/// `evals_per_entry` converts history entries to evaluations for the budget projection.
/// Returns nothing while the run should continue.
inline std::optional<Status> check_progress(const std::vector<double>& h, const SolverConfig& cfg,
                                            std::size_t evals_used, double evals_per_entry = 1.0) {
  if (h.empty()) return std::nullopt;
  const double last = h.back(), first = h.front();
  if (!std::isfinite(last)) return Status::diverged;
  if (last <= cfg.tol) return Status::converged;
  if (last > cfg.divergence_factor * first) return Status::diverged;

  // The window widens to half the history so that erratic but improving runs are not cut short.
  const std::size_t w = std::max(cfg.stagnation_window, h.size() / 2);
  if (h.size() > w) {
    const double start = h[h.size() - 1 - w];
    if (last <= start) {
      double best_before = h.front();
      for (std::size_t i = 0; i + w < h.size(); ++i) best_before = std::min(best_before, h[i]);
      double best_in = h[h.size() - w];
      for (std::size_t i = h.size() - w; i < h.size(); ++i) best_in = std::min(best_in, h[i]);
      if ((best_before - best_in) / best_before < cfg.stagnation_eps) return Status::stagnated;

      // Decay rate of the running minimum across the window.
      const double rate = (std::log(best_before) - std::log(best_in)) / static_cast<double>(w);
      const double remaining =
          cfg.max_iter > evals_used ? static_cast<double>(cfg.max_iter - evals_used) / evals_per_entry : 0.0;
      const double needed = rate > 0.0 ? std::log(last / cfg.tol) / rate : std::numeric_limits<double>::infinity();
      if (needed > 10.0 * remaining) return Status::stagnated;
    }
  }
  if (evals_used >= cfg.max_iter) return last > first ? Status::diverged : Status::max_iter;
  return std::nullopt;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// Classify a finished residual history, one entry per evaluation.
///
/// Order: non-finite or growth beyond divergence_factor gives diverged; reaching tol gives
/// converged; a full window (stagnation_window entries or half the history, whichever is
/// longer) without net growth is stagnated when its best value improved by less than
/// stagnation_eps relative, or when the decay rate of the running minimum across the window
/// would need over ten times the remaining budget to reach tol. A history that ends otherwise is diverged if it finished
/// above its first value and max_iter if not.
inline Status classify_termination(const std::vector<double>& history, const SolverConfig& cfg) {
  if (history.empty()) throw InvalidArgument("classify_termination: empty history");
  if (auto s = detail::check_progress(history, cfg, history.size() - 1)) return *s;
  return history.back() > history.front() ? Status::diverged : Status::max_iter;
}

}  // namespace usplit

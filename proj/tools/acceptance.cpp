// Acceptance checks 1-12. Prints one PASS/FAIL line per criterion; the exit code is the
// number of failures. Pass criterion numbers as arguments to run a subset.

#include <cstdio>
#include <functional>
#include <numbers>
#include <set>

#include "usplit/analysis/bounds.hpp"
#include "usplit/bench/suite.hpp"
#include "usplit/problems/condition.hpp"
#include "usplit/problems/pantograph.hpp"

using namespace usplit;

#ifndef USPLIT_CONFIG_DIR
#define USPLIT_CONFIG_DIR "configs"
#endif

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DenseMatrix random_dense(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = complex(g(rng), g(rng));
  return m;
}

double spectral_norm(const DenseMatrix& m) { return Eigen::JacobiSVD<DenseMatrix>(m).singularValues()(0); }

double min_hermitian_eig(const DenseMatrix& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Accretive A = L + V with ||V|| = v_norm; the Hermitian part of A has its smallest
// eigenvalue in [1e-3, 2 + 1e-3]. Hermitian pairs use Hermitian L and V.
std::pair<DenseMatrix, DenseMatrix> accretive_pair(std::mt19937_64& rng, bool hermitian = false,
                                                   double v_norm = 0.95) {
  const Eigen::Index n = std::uniform_int_distribution<Eigen::Index>(2, 8)(rng);
  const DenseMatrix g = random_dense(n, rng);
  DenseMatrix v = random_dense(n, rng);
  if (hermitian) v = (v + v.adjoint()).eval();
  v *= v_norm / spectral_norm(v);
  DenseMatrix l = hermitian ? DenseMatrix(g * g.adjoint()) : DenseMatrix(g - g.adjoint() + 0.3 * g * g.adjoint());
  const double shift = std::uniform_real_distribution<double>(0.0, 2.0)(rng) + 1e-3;
  l += (shift - min_hermitian_eig(l + v)) * DenseMatrix::Identity(n, n);
  return {l + v, v};
}

Outcome contraction() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int bad = 0;
  for (int t = 0; t < 200; ++t) {
    const auto [a, v] = accretive_pair(rng);
    const DenseMatrix b = DenseMatrix::Identity(a.rows(), a.cols()) - v;
    for (double alpha : {0.5, 0.75, 1.0}) {
      const double m = contraction_norm_dense(DenseOperator(a), DenseOperator(b), alpha).svd;
      worst = std::max(worst, m);
      if (!(m < 1.0)) ++bad;
    }
  }
  return {bad == 0, fmt("600 cases, max ||M|| = %.12f, %d >= 1", worst, bad)};
}

Outcome sharpness() {
  std::mt19937_64 rng(202);
  int bad = 0;
  double worst_below = 0.0, worst_above = 2.0;
  for (int t = 0; t < 200; ++t) {
    const auto [a, v] = accretive_pair(rng);
    const DenseMatrix b = DenseMatrix::Identity(a.rows(), a.cols()) - v;
    const double am = alpha_max_dense(DenseOperator(a), DenseOperator(b));
    const double below = contraction_norm_dense(DenseOperator(a), DenseOperator(b), 0.99 * am).svd;
    const double above = contraction_norm_dense(DenseOperator(a), DenseOperator(b), 1.01 * am).svd;
    worst_below = std::max(worst_below, below);
    worst_above = std::min(worst_above, above);
    if (!(below < 1.0) || !(above >= 1.0 - 1e-9)) ++bad;
  }
  return {bad == 0, fmt("200 pairs, max ||M|| below = %.9f, min above = %.9f", worst_below, worst_above)};
}

Outcome pencil_identity() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto [a, v] = accretive_pair(rng);
    const DenseMatrix b = DenseMatrix::Identity(a.rows(), a.cols()) - v;
    const double alpha = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    const auto c = contraction_norm_dense(DenseOperator(a), DenseOperator(b), alpha);
    worst = std::max(worst, std::abs(c.svd - c.lemma) / c.svd);
  }
  return {worst <= 1e-8, fmt("100 instances, max relative difference %.2e", worst)};
}

Outcome bounds() {
  std::mt19937_64 rng(404);
  int bad = 0, herm = 0;
  double kappa_ratio = 0.0, m_gap = -1.0;
  for (int t = 0; t < 100; ++t) {
    const bool hermitian = t % 2 == 1;
    const auto [a0, v0] = accretive_pair(rng, hermitian);
    const auto [a, v] = scale_to_optimal(a0, v0);
    const auto r = dense_bound_report(a, v);
    if (r.hermitian != hermitian) ++bad;
    herm += r.hermitian;
    kappa_ratio = std::max(kappa_ratio, r.kappa_measured / r.kappa_bound);
    m_gap = std::max(m_gap, r.m_norm_measured - r.m_norm_bound);
    if (r.kappa_measured > r.kappa_bound + 1e-9 || r.m_norm_measured > r.m_norm_bound + 1e-9) ++bad;
  }
  return {bad == 0,
          fmt("100 instances (%d Hermitian), max kappa/bound = %.4f, max ||M|| - bound = %.3e", herm, kappa_ratio, m_gap)};
}

Outcome uniqueness() {
  const Eigen::Index n = 3;
  const DenseMatrix id = DenseMatrix::Identity(n, n);
  const auto good = PreconditionerCandidate::universal(id, 0.75);
  std::vector<std::pair<int, PreconditionerCandidate>> cases;
  auto c1 = good;
  c1.gamma_B = 0.1 * id;
  cases.emplace_back(1, c1);
  auto c2 = good;
  c2.alpha_B(0, 1) = 0.3;
  cases.emplace_back(2, c2);
  auto c3 = good;
  c3.alpha_B(1, 1) = 0.4;
  cases.emplace_back(3, c3);
  auto c4 = good;
  c4.beta_B = DenseMatrix(Eigen::Vector3cd(1.0, 0.5, 1.0).asDiagonal());
  cases.emplace_back(4, c4);
  cases.emplace_back(5, PreconditionerCandidate::universal(id, complex(0.0, 0.5)));
  auto c6 = good;
  c6.adjoint = true;
  cases.emplace_back(6, c6);

  bool ok = true;
  std::string detail;
  for (const auto& [cond, cand] : cases) {
    const auto ce = uniqueness_counterexample(cond, cand);
    const double stretch = (cand.contraction(ce.A) * ce.witness).norm() / ce.witness.norm();
    const double universal = spectral_norm(good.contraction(ce.A));
    ok = ok && stretch > 1.0 && universal < 1.0;
    detail += fmt("%s%d: %.6g/%.6g", detail.empty() ? "" : ", ", cond, stretch, universal);
  }
  return {ok, "stretch/universal ||M|| per condition (6 = adjoint) " + detail};
}

Outcome helmholtz_green() {
  detail::Stopwatch clock;
  const std::size_t n = 512;
  const double k = 2.0 * std::numbers::pi / 16.0;
  HelmholtzSpec s;
  s.shape = {n};
  s.spacing = {1.0};
  s.k2.assign(n, k * k);
  s.source.assign(n, 0.0);
  s.source[n / 2] = 1.0;
  s.absorber_width = 128;
  s.absorber_strength = 0.06;
  const auto split = build_helmholtz_split(s, kDefaultTargetNorm, 1.0);
  SolverConfig cfg;
  cfg.tol = 1e-8;
  const auto [x, rep] = fixed_point_solve(build_preconditioned(split), cfg);
  const auto u = split.physical(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::abs(static_cast<double>(i) - static_cast<double>(n / 2));
    const complex g = complex(0.0, 1.0) / (2.0 * k) * std::exp(complex(0.0, k * r));
    num += std::norm(u[i] - g);
    den += std::norm(g);
  }
  const double err = std::sqrt(num / den), t = clock.seconds();
  return {rep.status == Status::converged && err < 0.01 && t < 5.0,
          fmt("n = %zu, relative L2 error %.4f, %zu iterations, %.2f s", n, err, rep.iterations, t)};
}

Outcome diffusion_slab() {
  detail::Stopwatch clock;
  const std::size_t n = 256, slab = 100;
  const double ze = 5.0;
  DiffusionSpec s;
  s.shape = {n};
  s.spacing = {1.0};
  s.D.assign(n, 1.0);
  s.a.assign(n, 0.0);
  s.source.assign(n, 0.0);
  const std::size_t z0 = (n - slab) / 2, z1 = z0 + slab, is = z0 + slab / 3;
  for (std::size_t i = 0; i < n; ++i)
    if (i < z0 || i >= z1) s.a[i] = 1.0 / (ze * ze);
  s.source[is] = 1.0;
  const auto split = build_diffusion_split(s, kDefaultTargetNorm, 1.0);
  SolverConfig cfg;
  cfg.tol = 1e-9;
  const auto [x, rep] = fixed_point_solve(build_preconditioned(split), cfg);
  const auto u = split.physical(x);
  // Linear profile vanishing z_e beyond each face, unit flux jump at the source.
  const double zl = z0 - 0.5, zr = z1 - 0.5, zs = static_cast<double>(is);
  const double lf = zs - zl + ze, rf = zr + ze - zs;
  const double bc = 1.0 / (1.0 + rf / lf), ac = bc * rf / lf;
  double num = 0.0, den = 0.0;
  for (std::size_t i = z0; i < z1; ++i) {
    const double z = static_cast<double>(i);
    const double ua = z < zs ? ac * (z - zl + ze) : bc * (zr + ze - z);
    num += std::norm(u[i] - ua);
    den += ua * ua;
  }
  const double err = std::sqrt(num / den), t = clock.seconds();
  return {rep.status == Status::converged && err < 0.02 && t < 5.0,
          fmt("n = %zu, relative L2 error %.4f, %zu iterations, %.2f s", n, err, rep.iterations, t)};
}

Outcome pantograph_fig() {
  const auto spec = non_accretive_pantograph();
  SolverConfig cfg;
  cfg.tol = 1e-8;
  const auto anti = build_pantograph_split(spec, kDefaultTargetNorm, true);
  const auto [xa, ra] = fixed_point_solve(build_preconditioned(anti), cfg);
  std::string plain_status;
  bool plain_diverged = false;
  try {
    const auto plain = build_pantograph_split(spec, kDefaultTargetNorm, false);
    const auto [xp, rp] = fixed_point_solve(build_preconditioned(plain), cfg);
    plain_status = std::string(to_string(rp.status)) + fmt(" after %zu iterations", rp.iterations);
    plain_diverged = rp.status == Status::diverged;
  } catch (const InvalidArgument& e) {
    plain_status = std::string("rejected (") + e.what() + ")";
  }
  const bool anti_ok = ra.status == Status::converged && ra.iterations <= 250;
  return {anti_ok && plain_diverged,
          fmt("antisymmetrized: %s after %zu iterations, final residual %.3e; plain: ", std::string(to_string(ra.status)).c_str(),
              ra.iterations, ra.residual_history.back()) +
              plain_status};
}

SuiteResult run_config_suite(const char* file, double* seconds) {
  detail::Stopwatch clock;
  auto r = run_suite(load_suite_file(std::filesystem::path(USPLIT_CONFIG_DIR) / file));
  *seconds = clock.seconds();
  return r;
}

Outcome table1() {
  double t = 0.0;
  const auto r = run_config_suite("table1.json", &t);
  int fp_none_ok = 0, universal_ok = 0, bicg_fail = 0, errors = 0;
  std::string failures;
  for (const auto& p : r.problems) {
    bool all_fp_diverged = true, all_universal = true;
    for (const auto& a : r.algorithms) {
      const auto* none = r.find(p, a, "none");
      const auto* uni = r.find(p, a, "universal");
      if (!none || !uni || !none->error.empty() || !uni->error.empty()) {
        ++errors;
        continue;
      }
      if (a.rfind("fp", 0) == 0 && none->report.status != Status::diverged) all_fp_diverged = false;
      if (uni->report.status != Status::converged || uni->report.operator_evals > 30000) {
        all_universal = false;
        failures += " " + p + "/" + a;
      }
      if (a == "bicgstab" && (none->report.status == Status::stagnated || none->report.status == Status::diverged))
        ++bicg_fail;
    }
    fp_none_ok += all_fp_diverged;
    universal_ok += all_universal;
  }
  const int n = static_cast<int>(r.problems.size());
  const bool pass = errors == 0 && n == 8 && fp_none_ok == n && universal_ok == n && bicg_fail >= 4 && t < 600.0;
  return {pass, fmt("(a) plain FP diverged at every step size on %d/%d, (b) universal all columns converged on %d/%d, "
                    "(c) plain BiCGSTAB s/d on %d/%d (need 4), %d cell errors, %.0f s",
                    fp_none_ok, n, universal_ok, n, bicg_fail, n, errors, t) +
                    (failures.empty() ? "" : "; not converged:" + failures)};
}

Outcome table2() {
  double t = 0.0;
  const auto r = run_config_suite("table2.json", &t);
  std::string shift_label;
  for (const auto& pc : r.preconditioners)
    if (pc.rfind("shift", 0) == 0) shift_label = pc;
  bool pass = !shift_label.empty() && r.problems.size() == 2;
  std::string detail;
  for (const auto& p : r.problems) {
    double worst = std::numeric_limits<double>::infinity();
    int compared = 0;
    for (const auto& a : r.algorithms) {
      const auto* uni = r.find(p, a, "universal");
      const auto* sh = r.find(p, a, shift_label);
      if (!uni || !sh || !uni->error.empty() || !sh->error.empty()) continue;
      if (uni->report.status != Status::converged || sh->report.status != Status::converged) continue;
      worst = std::min(worst, static_cast<double>(sh->report.operator_evals) /
                                  static_cast<double>(uni->report.operator_evals));
      ++compared;
    }
    pass = pass && compared > 0 && worst >= 5.0;
    detail += fmt("%s%s: min ratio %.1f over %d columns", detail.empty() ? "" : "; ", p.c_str(), worst, compared);
  }
  return {pass, detail + fmt(" (%.0f s)", t)};
}

Outcome schrodinger() {
  detail::Stopwatch clock;
  const auto study = schrodinger_condition_study(double_ring_spec());
  const bool pass = study.improvement >= 50.0 && study.preconditioned.kappa <= 1.05 * study.kappa_bound;
  return {pass, fmt("kappa %.1f -> %.3f (%.1fx), bound %.3f at S = %.3f, %.1f s", study.raw.kappa,
                    study.preconditioned.kappa, study.improvement, study.kappa_bound, study.S, clock.seconds())};
}

Outcome complex_bias() {
  const auto dir = std::filesystem::path(USPLIT_CONFIG_DIR);
  SolverConfig cfg;
  auto best = [&](const char* file, double* best_alpha) {
    const auto split = load_problem_file(dir / file).split;
    std::size_t out = std::numeric_limits<std::size_t>::max();
    for (double alpha : {1.0, 0.9, 0.8, 0.7, 0.6, 0.5}) {
      const auto [x, rep] = fixed_point_solve(build_preconditioned(split.with_alpha(alpha)), cfg);
      if (rep.status == Status::converged && rep.iterations < out) {
        out = rep.iterations;
        *best_alpha = alpha;
      }
    }
    return out;
  };
  double ar = 0.0, ac = 0.0;
  const auto real_bias = best("helmholtz_iron_R.json", &ar);
  const auto complex_bias = best("helmholtz_iron_C.json", &ac);
  const double gain = 1.0 - static_cast<double>(complex_bias) / static_cast<double>(real_bias);
  return {gain >= 0.10, fmt("iron cavity: real bias %zu iterations (alpha %.1f), complex bias %zu (alpha %.1f), %.0f%% fewer",
                            real_bias, ar, complex_bias, ac, 100.0 * gain)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"contraction of the universal split", contraction},
      {"sharpness of the step-size threshold", sharpness},
      {"pencil form of the contraction norm", pencil_identity},
      {"condition-number and rate bounds", bounds},
      {"uniqueness counterexamples", uniqueness},
      {"Helmholtz point source", helmholtz_green},
      {"diffusion slab", diffusion_slab},
      {"non-accretive pantograph", pantograph_fig},
      {"solver comparison pattern", table1},
      {"shift-splitting cost", table2},
      {"Schrodinger condition number", schrodinger},
      {"complex bias", complex_bias},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2d %s: %s: %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}

#ifndef WBGA_DIAGNOSTICS_HPP
#define WBGA_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "algorithms.hpp"
#include "config.hpp"
#include "perturbation.hpp"
#include "schedule.hpp"
#include "solvers.hpp"
#include "space.hpp"

namespace wbga {

enum class BoundId { cor21, thm52, cor52, thm72, cor72, prop72, thm91 };

inline const char* to_string(BoundId b) {
  switch (b) {
    case BoundId::cor21: return "cor21";
    case BoundId::thm52: return "thm52";
    case BoundId::cor52: return "cor52";
    case BoundId::thm72: return "thm72";
    case BoundId::cor72: return "cor72";
    case BoundId::prop72: return "prop72";
    case BoundId::thm91: return "thm91";
  }
  return "?";
}

inline BoundId parse_bound_id(const std::string& s) {
  for (BoundId b : {BoundId::cor21, BoundId::thm52, BoundId::cor52, BoundId::thm72,
                    BoundId::cor72, BoundId::prop72, BoundId::thm91})
    if (s == to_string(b)) return b;
  throw StructuralError("unknown bound id '" + s + "'");
}

struct BoundSpec {
  BoundId id = BoundId::cor52;
  double q = 2.0;
  double gamma = 0.5;
  double p_conj = 2.0;
  double t = 1.0;  // constant weakness, cor21 only
  double a_eps = 1.0;
  double eps = 0.0;

  static BoundSpec make(BoundId id, const LpSpace& space) {
    BoundSpec b;
    b.id = id;
    b.q = space.q;
    b.gamma = space.gamma;
    b.p_conj = space.p_conj;
    return b;
  }

  void validate() const {
    if (!(q > 1.0 && q <= 2.0) || !(gamma > 0.0) ||
        std::fabs(p_conj - q / (q - 1.0)) > 1e-12 * p_conj)
      throw StructuralError("bound spec: inconsistent (q, gamma, p_conj)");
    if (!(t > 0.0 && t <= 1.0)) throw StructuralError("bound spec: t must lie in (0, 1]");
    if (!(a_eps > 0.0) || !(eps >= 0.0)) throw StructuralError("bound spec: invalid A or eps");
  }
};

/// The constant C of each rate bound.
inline double bound_constant(const BoundSpec& b) {
  const double q = b.q, g = b.gamma, p = b.p_conj;
  switch (b.id) {
    case BoundId::cor21: return 16.0 * std::pow(g, 1.0 / q) * std::pow(b.t, -1.0 / p);
    case BoundId::thm52:
    case BoundId::cor52:
    case BoundId::thm91: return 4.0 * std::pow(2.0 * g, 1.0 / q);
    case BoundId::thm72:
    case BoundId::cor72:
    case BoundId::prop72:
      return 4.0 * q * std::pow(2.0 * g, q) * std::pow(2.0 / (q - 1.0), 1.0 / p);
  }
  throw StructuralError("unknown bound id");
}

/// Right-hand side of the rate bound after m iterations;
/// `partial_sum` = sum_{k<=m} t_k^{p_conj}.
inline double rate_bound(const BoundSpec& b, int m, double partial_sum) {
  b.validate();
  const double C = bound_constant(b);
  const double p = b.p_conj;
  switch (b.id) {
    case BoundId::cor21:
      if (m <= 0) return std::numeric_limits<double>::infinity();
      return C * std::pow(static_cast<double>(m), -1.0 / p);
    case BoundId::cor52:
    case BoundId::cor72:
    case BoundId::prop72: return C * std::pow(1.0 + partial_sum, -1.0 / p);
    case BoundId::thm52:
      return std::max(2.0 * b.eps, C * (b.a_eps + b.eps) * std::pow(1.0 + partial_sum, -1.0 / p));
    case BoundId::thm72:
      return std::max(4.0 * b.eps, C * (b.a_eps + b.eps) * std::pow(1.0 + partial_sum, -1.0 / p));
    case BoundId::thm91:
      return std::max(2.0 * b.eps,
                      C * (b.a_eps + b.eps) * std::pow(1.0 + static_cast<double>(m), -1.0 / p));
  }
  throw StructuralError("unknown bound id");
}

// ---------------------------------------------------------------------------
// Audits

struct AuditTolerances {
  double gs = 1e-12;
  double er = 1e-6;
  double bo = 1e-6;
  double mono = 1e-6;
  double bj = 1e-6;
  double neg_lambda = 1e-9;
  double erl = 1e-6;
  double bound = 1e-6;
};

/// One named check over all iterations. A margin is (allowed - measured);
/// the check passes when every margin is >= -tol.
struct CheckResult {
  std::string name;
  bool applicable = true;
  std::string skip_reason;
  double tol = 0.0;
  std::vector<double> margins;
  std::vector<double> ratios;  // bound checks: residual / bound
  double worst = std::numeric_limits<double>::infinity();
  int failures = 0;
  int first_failure_m = 0;

  bool pass() const { return !applicable || failures == 0; }

  void add(int m, double margin) {
    margins.push_back(margin);
    if (std::isnan(margin) || margin < worst) worst = margin;
    if (!(margin >= -tol)) {
      if (failures == 0) first_failure_m = m;
      ++failures;
    }
  }

  static CheckResult skipped(std::string name, std::string reason) {
    CheckResult c;
    c.name = std::move(name);
    c.applicable = false;
    c.skip_reason = std::move(reason);
    return c;
  }
};

struct AuditReport {
  std::vector<CheckResult> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass(); });
  }

  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  std::vector<std::string> failing() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (!c.pass()) out.push_back(c.name);
    return out;
  }

  void merge(const AuditReport& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }
};

namespace detail {

inline void require_complete(const RunReport& r) {
  if (r.space.empty() || r.algorithm.empty() || r.termination.empty())
    throw StructuralError("incomplete report");
  for (std::size_t i = 0; i < r.records.size(); ++i)
    if (r.records[i].m != static_cast<int>(i) + 1)
      throw StructuralError("incomplete report: records are not contiguous from m=1");
}

inline bool uses_auto_schedule(const RunReport& r) {
  return r.errors.find("prop72auto") != std::string::npos;
}

}  // namespace detail

/// Per-iteration verification of the class-defining conditions and the
/// orthogonality remarks, for the checks that apply to the run's algorithm.
inline AuditReport audit_conditions(const RunReport& r, const AuditTolerances& tol = {}) {
  detail::require_complete(r);
  const Algorithm algo = parse_algorithm(r.algorithm);
  const Algorithm base = exact_counterpart(algo);
  const bool approx = is_approximate(algo);
  const bool exact_class = in_wbga_class(algo);

  auto make = [](const char* name, double t) {
    CheckResult c;
    c.name = name;
    c.tol = t;
    return c;
  };
  CheckResult gs = make("greedy_selection", tol.gs);
  CheckResult er = make("error_reduction", tol.er);
  CheckResult bo = make("biorthogonality", tol.bo);
  CheckResult mono = make("monotonicity", tol.mono);
  CheckResult bj = make("birkhoff_james", tol.bj);
  CheckResult neg = make("negative_lambda", tol.neg_lambda);

  const bool do_gs = base != Algorithm::rrxga;
  const bool do_er = exact_class || approx || base == Algorithm::rrxga || base == Algorithm::wdga;
  const bool do_bo = exact_class || approx || base == Algorithm::rrxga || base == Algorithm::gg;
  const bool do_mono = base != Algorithm::wrga || r.has_certificate;
  const bool do_bj = exact_class || base == Algorithm::rrxga || base == Algorithm::gg;
  const bool do_neg = exact_class || base == Algorithm::wdga;

  for (const auto& rec : r.records) {
    const double eta = approx ? rec.eta_m : 0.0;
    const double eps = approx ? rec.eps_m : 0.0;
    if (do_gs) gs.add(rec.m, rec.gs_lhs - rec.gs_rhs);
    if (do_er) er.add(rec.m, (1.0 + eta) * rec.er_reference - rec.residual_norm);
    if (do_bo) bo.add(rec.m, eps - rec.bo_abs);
    if (do_mono) mono.add(rec.m, (1.0 + eta) * rec.prev_norm - rec.residual_norm);
    if (do_bj) bj.add(rec.m, rec.bj_margin);
    if (do_neg) neg.add(rec.m, rec.neg_lambda_margin);
  }

  AuditReport out;
  const std::string why = "not a condition of " + r.algorithm;
  out.checks.push_back(do_gs ? gs : CheckResult::skipped(gs.name, why));
  out.checks.push_back(do_er ? er : CheckResult::skipped(er.name, why));
  out.checks.push_back(do_bo ? bo : CheckResult::skipped(bo.name, why));
  out.checks.push_back(do_mono ? mono
                               : CheckResult::skipped(mono.name, "wrga target outside A_1"));
  out.checks.push_back(do_bj ? bj : CheckResult::skipped(bj.name, why));
  out.checks.push_back(do_neg ? neg : CheckResult::skipped(neg.name, why));

  if (approx && detail::uses_auto_schedule(r)) {
    CheckResult sched = make("schedule_thresholds", 0.0);
    const LpSpace space = parse_space_spec(r.space);
    const WeaknessSchedule tau = parse_weakness_spec(r.weakness);
    sched.add(0, prop72_threshold(space, r.initial_norm, tau.at(1)) - r.initial_delta);
    for (const auto& rec : r.records) {
      if (rec.exact) continue;
      const double limit_delta = prop72_threshold(space, rec.residual_norm, tau.at(rec.m + 1));
      const double limit_eta = prop72_threshold(space, rec.residual_norm, rec.t_m);
      sched.add(rec.m, std::min(limit_delta - rec.delta_m, limit_eta - rec.eta_m));
    }
    out.checks.push_back(sched);
  }
  return out;
}

/// Minimum over lambda >= 0 of a convex expression: 512-point grid on
/// [0, hi] plus golden refinement; the interval doubles while the minimum
/// sits on its right end.
inline ScalarMin lemma_rhs_min(const ScalarFn& rhs, double hi) {
  ScalarMin best{0.0, rhs(0.0)};
  for (int grow = 0; grow < 60; ++grow) {
    best = dense_line_min(rhs, 0.0, hi);
    if (best.arg < hi * (1.0 - 1.0 / 256.0)) break;
    hi *= 2.0;
  }
  return best;
}

/// Right-hand side of the Error Reduction Lemma for one step. `delta`,
/// `eta`, `eps_prev` are the error parameters of the approximate class (all
/// zero for the exact class).
inline double error_reduction_rhs(const LpSpace& space, double prev_norm, double t, double a_eps,
                                  double eps, double delta = 0.0, double eta = 0.0,
                                  double eps_prev = 0.0) {
  if (prev_norm <= 0.0) return 0.0;
  const double slope = t / a_eps * (1.0 - delta - (eps_prev + eps) / prev_norm);
  auto rhs = [&](double lam) {
    return prev_norm * (1.0 + eta) *
           (1.0 + delta + 2.0 * smoothness_bound(space, lam / prev_norm) - lam * slope);
  };
  return lemma_rhs_min(rhs, 2.0 * prev_norm).value;
}

/// Per-iteration margins of the Error Reduction Lemma, with rho replaced by
/// its power-type bound.
inline CheckResult check_error_reduction_lemma(const RunReport& r, double a_eps, double eps,
                                               const AuditTolerances& tol = {}) {
  detail::require_complete(r);
  const Algorithm algo = parse_algorithm(r.algorithm);
  const Algorithm base = exact_counterpart(algo);
  const bool approx = is_approximate(algo);
  if (!r.has_certificate)
    return CheckResult::skipped("error_reduction_lemma", "target has no (eps, A(eps)) certificate");
  if (!(in_wbga_class(algo) || approx || base == Algorithm::rrxga))
    return CheckResult::skipped("error_reduction_lemma", "lemma does not cover " + r.algorithm);
  const LpSpace space = parse_space_spec(r.space);
  CheckResult c;
  c.name = "error_reduction_lemma";
  c.tol = tol.erl;
  double delta_prev = r.initial_achieved_delta;
  double eps_prev = 0.0;
  for (const auto& rec : r.records) {
    double rhs;
    if (approx) {
      rhs = error_reduction_rhs(space, rec.prev_norm, rec.t_m, a_eps, eps, delta_prev, rec.eta_m,
                                eps_prev);
      delta_prev = rec.achieved_delta;
      eps_prev = rec.bo_abs;
    } else {
      rhs = error_reduction_rhs(space, rec.prev_norm, rec.t_m, a_eps, eps);
    }
    c.add(rec.m, rhs - rec.residual_norm);
  }
  return c;
}

inline CheckResult check_error_reduction_lemma(const RunReport& r, const AuditTolerances& tol = {}) {
  return check_error_reduction_lemma(r, r.a_eps, r.eps, tol);
}

// ---------------------------------------------------------------------------
// Rate bounds over a run

/// The rate bound spec implied by a report's metadata, or an explanation of
/// why `id` does not apply to it.
inline std::optional<BoundSpec> bound_spec_for(BoundId id, const RunReport& r, std::string* why) {
  const Algorithm algo = parse_algorithm(r.algorithm);
  const LpSpace space = parse_space_spec(r.space);
  BoundSpec b = BoundSpec::make(id, space);
  auto fail = [&](const std::string& reason) -> std::optional<BoundSpec> {
    if (why) *why = reason;
    return std::nullopt;
  };
  if (!r.has_certificate) return fail("target has no A_1 certificate");
  b.a_eps = r.a_eps;
  b.eps = r.eps;
  const bool a1 = r.eps == 0.0 && r.a_eps == 1.0;
  switch (id) {
    case BoundId::cor21: {
      if (!in_wbga_class(algo)) return fail("bound covers wcga, wgafr, rwrga");
      if (!a1) return fail("bound requires f in A_1");
      const WeaknessSchedule tau = parse_weakness_spec(r.weakness);
      if (!tau.is_constant()) return fail("bound requires a constant weakness sequence");
      b.t = tau.seq.c;
      break;
    }
    case BoundId::cor52:
      if (!a1) return fail("bound requires f in A_1");
      [[fallthrough]];
    case BoundId::thm52:
      if (!in_wbga_class(algo)) return fail("bound covers wcga, wgafr, rwrga");
      break;
    case BoundId::cor72:
    case BoundId::prop72:
      if (!a1) return fail("bound requires f in A_1");
      [[fallthrough]];
    case BoundId::thm72:
      if (!(is_approximate(algo) || in_wbga_class(algo)))
        return fail("bound covers the approximate class");
      if (id == BoundId::prop72 && is_approximate(algo) && !detail::uses_auto_schedule(r))
        return fail("bound requires the threshold schedules (prop72auto)");
      break;
    case BoundId::thm91:
      if (exact_counterpart(algo) != Algorithm::rrxga) return fail("bound covers rrxga");
      break;
  }
  return b;
}

/// Bound reported next to each iteration: the strongest applicable one.
inline std::optional<BoundSpec> default_bound(const RunReport& r) {
  const Algorithm algo = parse_algorithm(r.algorithm);
  const bool a1 = r.eps == 0.0 && r.a_eps == 1.0;
  std::optional<BoundId> id;
  if (in_wbga_class(algo)) id = a1 ? BoundId::cor52 : BoundId::thm52;
  if (algo == Algorithm::rrxga) id = BoundId::thm91;
  if (is_approximate(algo) && detail::uses_auto_schedule(r))
    id = a1 ? BoundId::prop72 : BoundId::thm72;
  if (!id) return std::nullopt;
  return bound_spec_for(*id, r, nullptr);
}

/// Bound values for m = 1..records.size().
inline std::vector<double> bound_series(const BoundSpec& b, const RunReport& r) {
  std::vector<double> out;
  double S = 0.0;
  for (const auto& rec : r.records) {
    S += std::pow(rec.t_m, b.p_conj);
    out.push_back(rate_bound(b, rec.m, S));
  }
  return out;
}

inline AuditReport verify_rates(const RunReport& r, const std::vector<BoundId>& ids,
                                const AuditTolerances& tol = {}) {
  detail::require_complete(r);
  AuditReport out;
  for (BoundId id : ids) {
    const std::string name = std::string("bound_") + to_string(id);
    std::string why;
    auto spec = bound_spec_for(id, r, &why);
    if (!spec) {
      out.checks.push_back(CheckResult::skipped(name, why));
      continue;
    }
    CheckResult c;
    c.name = name;
    c.tol = tol.bound;
    const auto bounds = bound_series(*spec, r);
    for (std::size_t i = 0; i < r.records.size(); ++i) {
      c.add(r.records[i].m, bounds[i] - r.records[i].residual_norm);
      c.ratios.push_back(r.records[i].residual_norm / bounds[i]);
    }
    out.checks.push_back(std::move(c));
  }
  return out;
}

/// Partial sums of t_m * xi_m, whose divergence drives convergence; only
/// their growth can be reported.
inline std::vector<double> xi_partial_sums(const RunReport& r, double theta) {
  const LpSpace space = parse_space_spec(r.space);
  std::vector<double> out;
  double S = 0.0;
  for (const auto& rec : r.records) {
    if (rec.t_m > 0.0) S += rec.t_m * xi_root(space, RhoMode::power_bound, rec.t_m, theta);
    out.push_back(S);
  }
  return out;
}

}  // namespace wbga

#endif  // WBGA_DIAGNOSTICS_HPP

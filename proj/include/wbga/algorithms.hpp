#ifndef WBGA_ALGORITHMS_HPP
#define WBGA_ALGORITHMS_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "dictionary.hpp"
#include "perturbation.hpp"
#include "schedule.hpp"
#include "solvers.hpp"
#include "space.hpp"

namespace wbga {

enum class Algorithm { wcga, wgafr, rwrga, rrxga, wrga, wdga, gg, awcga, awgafr, arwrga };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::wcga: return "wcga";
    case Algorithm::wgafr: return "wgafr";
    case Algorithm::rwrga: return "rwrga";
    case Algorithm::rrxga: return "rrxga";
    case Algorithm::wrga: return "wrga";
    case Algorithm::wdga: return "wdga";
    case Algorithm::gg: return "gg";
    case Algorithm::awcga: return "awcga";
    case Algorithm::awgafr: return "awgafr";
    case Algorithm::arwrga: return "arwrga";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& id) {
  for (Algorithm a : {Algorithm::wcga, Algorithm::wgafr, Algorithm::rwrga, Algorithm::rrxga,
                      Algorithm::wrga, Algorithm::wdga, Algorithm::gg, Algorithm::awcga,
                      Algorithm::awgafr, Algorithm::arwrga})
    if (id == to_string(a)) return a;
  throw StructuralError("unknown algorithm id '" + id + "'");
}

inline bool is_approximate(Algorithm a) {
  return a == Algorithm::awcga || a == Algorithm::awgafr || a == Algorithm::arwrga;
}

inline Algorithm exact_counterpart(Algorithm a) {
  switch (a) {
    case Algorithm::awcga: return Algorithm::wcga;
    case Algorithm::awgafr: return Algorithm::wgafr;
    case Algorithm::arwrga: return Algorithm::rwrga;
    default: return a;
  }
}

/// Members of the exact biorthogonal class.
inline bool in_wbga_class(Algorithm a) {
  return a == Algorithm::wcga || a == Algorithm::wgafr || a == Algorithm::rwrga;
}

struct GreedyState {
  Vector f;
  Vector residual;  // f_m
  Vector G;         // G_m
  double residual_norm = 0.0;
  int m = 0;
  std::vector<int> selected;
  Matrix basis;  // selected atoms, WCGA only
  Vector coeffs;

  static GreedyState start(const LpSpace& space, const Vector& f) {
    require_dim(space, f);
    if (!f.allFinite()) throw StructuralError("target has non-finite coordinates");
    GreedyState s;
    s.f = f;
    s.residual = f;
    s.G = Vector::Zero(f.size());
    s.residual_norm = norm(space, f);
    s.basis.resize(f.size(), 0);
    return s;
  }
};

/// Relative slack eta for the minimisations of one step; eta = 0 is exact.
struct Relaxation {
  double eta = 0.0;
  std::uint64_t seed = 0;
};

struct StepInfo {
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double omega = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
  bool converged = true;
  double dual_choice_value = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  std::uint64_t h = a * 0x9e3779b97f4a7c15ULL ^ (b + 0x632be59bd9b4e019ULL);
  h ^= h >> 31;
  h = h * 0xbf58476d1ce4e5b9ULL ^ (c + 0x94d049bb133111ebULL);
  h ^= h >> 29;
  return h;
}

inline void commit(const LpSpace& space, GreedyState& s, Vector G, int index) {
  s.G = std::move(G);
  s.residual = s.f - s.G;
  s.residual_norm = lr_norm(s.residual, space.p);
  s.selected.push_back(index);
  ++s.m;
}

inline double norm_of(const LpSpace& space, const Vector& x) { return lr_norm(x, space.p); }

/// min over lambda >= 0 of ||r - lambda g||, relaxed by eta.
inline ScalarMin ray_step(const LpSpace& space, const Vector& r, const Vector& g,
                          const SolverConfig& cfg, double eta, std::uint64_t seed) {
  ScalarMin ex = minimize_residual_ray(space, r, g, cfg);
  if (eta == 0.0) return ex;
  Vector z(r.size());
  auto obj = [&](const Vector& x) {
    z = r - x[0] * g;
    return norm_of(space, z);
  };
  VecMin out = relaxed_minimize(
      obj, eta, [&] { return VecMin{Vector::Constant(1, ex.arg), ex.value}; }, seed,
      Vector::Constant(1, 0.0));
  return {out.arg[0], out.value};
}

/// min over mu in R of ||f - mu h||, relaxed by eta.
inline ScalarMin rescale_step(const LpSpace& space, const Vector& f, const Vector& h,
                              const SolverConfig& cfg, double eta, std::uint64_t seed) {
  ScalarMin ex = minimize_rescale(space, f, h, cfg);
  if (eta == 0.0) return ex;
  Vector z(f.size());
  auto obj = [&](const Vector& x) {
    z = f - x[0] * h;
    return norm_of(space, z);
  };
  VecMin out = relaxed_minimize(
      obj, eta, [&] { return VecMin{Vector::Constant(1, ex.arg), ex.value}; }, seed);
  return {out.arg[0], out.value};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// One-step transitions. `sel` is the outcome of the greedy selection; the
// state is advanced in place.

inline StepInfo advance_wcga(GreedyState& s, const Dictionary& D, const Selection& sel,
                             const SolverConfig& cfg, const Relaxation& relax = {}) {
  const LpSpace& space = D.space;
  const Vector phi = D.element(sel.index);
  const Eigen::Index k = s.basis.cols();
  s.basis.conservativeResize(Eigen::NoChange, k + 1);
  s.basis.col(k) = phi;
  Vector init(k + 1);
  init.head(k) = s.coeffs;
  init[k] = 0.0;
  Projection proj = chebyshev_project(space, s.f, s.basis, cfg, init);
  StepInfo info;
  info.converged = proj.converged;
  Vector c = proj.coeffs;
  if (relax.eta > 0.0 && proj.residual_norm > 0.0) {
    Vector z(s.f.size());
    auto obj = [&](const Vector& x) {
      z = s.f - s.basis * x;
      return detail::norm_of(space, z);
    };
    c = relaxed_minimize(
            obj, relax.eta, [&] { return VecMin{proj.coeffs, proj.residual_norm}; }, relax.seed)
            .arg;
  }
  s.coeffs = c;
  info.lambda = c[k];
  detail::commit(space, s, s.basis * c, sel.index);
  return info;
}

inline StepInfo advance_wgafr(GreedyState& s, const Dictionary& D, const Selection& sel,
                              const SolverConfig& cfg, const Relaxation& relax = {}) {
  const LpSpace& space = D.space;
  const Vector phi = D.element(sel.index);
  StepInfo info;
  if (detail::norm_of(space, s.G) == 0.0) {
    ScalarMin m = detail::ray_step(space, s.residual, phi, cfg, relax.eta, relax.seed);
    info.omega = 0.0;
    info.lambda = m.arg;
    detail::commit(space, s, m.arg * phi, sel.index);
    return info;
  }
  // Unconstrained optimum over span{G_{m-1}, phi}; G_m = a G_{m-1} + lambda phi.
  Matrix B(s.f.size(), 2);
  B.col(0) = s.G;
  B.col(1) = phi;
  Vector init(2);
  init << 1.0, 0.0;
  Projection proj = chebyshev_project(space, s.f, B, cfg, init);
  double omega = 1.0 - proj.coeffs[0];
  double lambda = proj.coeffs[1];
  double value = proj.residual_norm;
  info.converged = proj.converged;
  Vector z(s.f.size());
  auto obj2 = [&](double w, double lam) {
    z = s.f - (1.0 - w) * s.G - lam * phi;
    return detail::norm_of(space, z);
  };
  if (!(lambda >= 0.0)) {
    // The constrained optimum then sits on lambda = 0.
    ScalarMin a = minimize_rescale(space, s.f, s.G, cfg);
    omega = 1.0 - a.arg;
    lambda = 0.0;
    value = a.value;
    info.converged = true;
  }
  if (!info.converged) {
    Min2d m2 = minimize_2d(obj2, cfg, omega, std::max(lambda, 0.0), 0.0);
    if (m2.value < value || !(lambda >= 0.0)) {
      omega = m2.w;
      lambda = m2.lambda;
      value = m2.value;
    }
  }
  if (relax.eta > 0.0 && value > 0.0) {
    auto obj = [&](const Vector& x) { return obj2(x[0], x[1]); };
    Vector arg(2), lower(2);
    arg << omega, lambda;
    lower << -std::numeric_limits<double>::infinity(), 0.0;
    VecMin r = relaxed_minimize(
        obj, relax.eta, [&] { return VecMin{arg, value}; }, relax.seed, lower);
    omega = r.arg[0];
    lambda = r.arg[1];
  }
  info.omega = omega;
  info.lambda = lambda;
  detail::commit(space, s, (1.0 - omega) * s.G + lambda * phi, sel.index);
  return info;
}

/// The two searches each take a third of the slack.
inline StepInfo advance_rwrga(GreedyState& s, const Dictionary& D, const Selection& sel,
                              const SolverConfig& cfg, const Relaxation& relax = {}) {
  const LpSpace& space = D.space;
  const Vector phi = D.element(sel.index);
  StepInfo info;
  const double eta = relax.eta / 3.0;
  ScalarMin lam = detail::ray_step(space, s.residual, phi, cfg, eta, relax.seed);
  const Vector H = s.G + lam.arg * phi;
  ScalarMin mu = detail::rescale_step(space, s.f, H, cfg, eta, detail::mix_seed(relax.seed, 1));
  info.lambda = lam.arg;
  info.mu = mu.arg;
  detail::commit(space, s, mu.arg * H, sel.index);
  return info;
}

/// X-greedy step: every +-g_i is tried with its best real coefficient and the
/// smallest residual wins (smallest index on ties). `sel` is only used to
/// report how the dual choice would have fared.
inline StepInfo advance_rrxga(GreedyState& s, const Dictionary& D, const Selection& sel,
                              const SolverConfig& cfg) {
  const LpSpace& space = D.space;
  const double nr = s.residual_norm;
  int best_index = 0;
  double best_value = std::numeric_limits<double>::infinity();
  double best_lambda = 0.0;
  for (Eigen::Index i = 0; i < D.size(); ++i) {
    const Vector g = D.atoms.col(i);
    const double ng = detail::norm_of(space, g);
    const double B = 2.0 * nr / ng;
    ScalarMin m = minimize_residual_line(space, s.residual, g, -B, B, cfg);
    if (m.value < best_value) {
      best_value = m.value;
      best_lambda = m.arg;
      best_index = static_cast<int>(i) + 1;
    }
  }
  StepInfo info;
  info.dual_choice_value = minimize_residual_ray(space, s.residual, D.element(sel.index), cfg).value;
  // Store the pair as (phi, lambda >= 0) with phi = sign(lambda) g.
  if (best_lambda < 0.0) {
    best_index = -best_index;
    best_lambda = -best_lambda;
  }
  const Vector phi = D.element(best_index);
  const Vector H = s.G + best_lambda * phi;
  ScalarMin mu = minimize_rescale(space, s.f, H, cfg);
  info.lambda = best_lambda;
  info.mu = mu.arg;
  detail::commit(space, s, mu.arg * H, best_index);
  return info;
}

inline StepInfo advance_wrga(GreedyState& s, const Dictionary& D, const Selection& sel,
                             const SolverConfig& cfg) {
  const LpSpace& space = D.space;
  const Vector phi = D.element(sel.index);
  const Vector dir = phi - s.G;
  ScalarMin m = minimize_residual_line(space, s.residual, dir, 0.0, 1.0, cfg);
  StepInfo info;
  info.lambda = m.arg;
  detail::commit(space, s, (1.0 - m.arg) * s.G + m.arg * phi, sel.index);
  return info;
}

inline StepInfo advance_wdga(GreedyState& s, const Dictionary& D, const Selection& sel,
                             const SolverConfig& cfg) {
  const LpSpace& space = D.space;
  const Vector phi = D.element(sel.index);
  ScalarMin m = minimize_residual_ray(space, s.residual, phi, cfg);
  StepInfo info;
  info.lambda = m.arg;
  detail::commit(space, s, s.G + m.arg * phi, sel.index);
  return info;
}

/// Explicit step length from (q, gamma), then the free rescale.
inline double gg_lambda(const LpSpace& space, double residual_norm, double functional_value) {
  const double q = space.q;
  return sign_of(functional_value) * residual_norm *
         std::pow(std::fabs(functional_value) / (2.0 * space.gamma * q), 1.0 / (q - 1.0));
}

inline StepInfo advance_gg(GreedyState& s, const Dictionary& D, const Selection& sel,
                           const SolverConfig& cfg) {
  const LpSpace& space = D.space;
  const Vector phi = D.element(sel.index);
  StepInfo info;
  info.lambda = gg_lambda(space, s.residual_norm, sel.value);
  const Vector H = s.G + info.lambda * phi;
  ScalarMin mu = minimize_rescale(space, s.f, H, cfg);
  info.mu = mu.arg;
  detail::commit(space, s, mu.arg * H, sel.index);
  return info;
}

inline StepInfo advance(Algorithm algo, GreedyState& s, const Dictionary& D, const Selection& sel,
                        const SolverConfig& cfg, const Relaxation& relax = {}) {
  switch (exact_counterpart(algo)) {
    case Algorithm::wcga: return advance_wcga(s, D, sel, cfg, relax);
    case Algorithm::wgafr: return advance_wgafr(s, D, sel, cfg, relax);
    case Algorithm::rwrga: return advance_rwrga(s, D, sel, cfg, relax);
    case Algorithm::rrxga: return advance_rrxga(s, D, sel, cfg);
    case Algorithm::wrga: return advance_wrga(s, D, sel, cfg);
    case Algorithm::wdga: return advance_wdga(s, D, sel, cfg);
    case Algorithm::gg: return advance_gg(s, D, sel, cfg);
    default: break;
  }
  throw std::logic_error("unhandled algorithm");
}

/// Selection with the exact norming functional of the current residual
/// followed by the step of `algo`.
inline StepInfo step(Algorithm algo, GreedyState& s, const Dictionary& D, double t,
                     const SolverConfig& cfg, SelectionRule rule = SelectionRule::exact_argmax) {
  if (s.residual_norm == 0.0) throw std::domain_error("step from a zero residual");
  const Selection sel = greedy_select(norming_functional(D.space, s.residual), D, t, rule);
  return advance(algo, s, D, sel, cfg);
}

inline StepInfo step_wcga(GreedyState& s, const Dictionary& D, double t, const SolverConfig& cfg) {
  return step(Algorithm::wcga, s, D, t, cfg);
}
inline StepInfo step_wgafr(GreedyState& s, const Dictionary& D, double t, const SolverConfig& cfg) {
  return step(Algorithm::wgafr, s, D, t, cfg);
}
inline StepInfo step_rwrga(GreedyState& s, const Dictionary& D, double t, const SolverConfig& cfg) {
  return step(Algorithm::rwrga, s, D, t, cfg);
}
inline StepInfo step_rrxga(GreedyState& s, const Dictionary& D, const SolverConfig& cfg) {
  return step(Algorithm::rrxga, s, D, 1.0, cfg);
}
inline StepInfo step_variant(GreedyState& s, const Dictionary& D, double t, Algorithm variant,
                             const SolverConfig& cfg) {
  if (variant != Algorithm::wrga && variant != Algorithm::wdga && variant != Algorithm::gg)
    throw std::invalid_argument("step_variant expects wrga, wdga or gg");
  return step(variant, s, D, t, cfg);
}

// ---------------------------------------------------------------------------
// Driver

struct IterationRecord {
  static constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  int m = 0;
  int selected_index = 0;
  double t_m = 1.0;
  double gs_lhs = 0.0;     // F_{m-1}(phi_m)
  double gs_rhs = 0.0;     // t_m ||F_{m-1}||_D
  double dict_norm = 0.0;  // ||F_{m-1}||_D
  double prev_norm = 0.0;  // ||f_{m-1}||
  double residual_norm = 0.0;
  double g_norm = 0.0;     // ||G_m||
  double bo_abs = 0.0;     // |F_m(G_m)|
  double er_reference = 0.0;  // inf_{lambda>=0} ||f_{m-1} - lambda phi_m||, dense search
  double lambda = nan;
  double omega = nan;
  double mu = nan;
  double delta_m = 0.0;  // requested inexactness of F_m
  double achieved_delta = 0.0;
  double eta_m = 0.0;
  double eps_m = 0.0;
  double bj_margin = nan;          // min over grid of ||f_m - lambda G_m|| - ||f_m||
  double neg_lambda_margin = nan;  // min over lambda < 0 of ||f_{m-1} - lambda phi_m|| - ||f_{m-1}||
  double dual_choice_value = nan;  // X-greedy: best residual along the dual choice
  bool solver_converged = true;
  bool exact = false;
  bool schedule_violation = false;
  std::int64_t wall_ns = 0;
};

struct RunReport {
  int schema = 1;
  std::string algorithm;
  std::string space;
  std::string dictionary;
  std::string target;
  bool has_certificate = false;
  double eps = 0.0;
  double a_eps = 1.0;
  double noise_norm = 0.0;
  std::string weakness;
  std::string selection;
  std::string errors;  // empty for exact algorithms
  SolverConfig solver;
  int max_m = 0;
  double stop_tol = 0.0;
  std::uint64_t seed = 0;
  double initial_norm = 0.0;
  double initial_delta = 0.0;  // delta_0
  double initial_achieved_delta = 0.0;
  std::vector<IterationRecord> records;
  std::string termination;
  std::vector<std::string> warnings;
};

struct RunOptions {
  SelectionRule rule = SelectionRule::exact_argmax;
  std::optional<ErrorSchedule> errors;  // used by the approximate algorithms
  std::uint64_t seed = 0;               // perturbation seed
  bool record_timings = false;
  const Target* target = nullptr;       // metadata only
  std::string target_spec;
};

namespace detail {

inline constexpr double kBjGrid[] = {-1.0, -0.5, 0.1, 0.5, 1.0};
inline constexpr double kNegLambdaGrid[] = {-2.0, -1.0, -0.5, -0.1, -0.01};

inline double bj_margin(const LpSpace& space, const Vector& r, const Vector& G, double nr) {
  double worst = std::numeric_limits<double>::infinity();
  for (double lam : kBjGrid) worst = std::min(worst, norm_of(space, r - lam * G) - nr);
  return worst;
}

inline double neg_lambda_margin(const LpSpace& space, const Vector& r, const Vector& phi,
                                double nr) {
  double worst = std::numeric_limits<double>::infinity();
  for (double k : kNegLambdaGrid) worst = std::min(worst, norm_of(space, r - k * nr * phi) - nr);
  return worst;
}

inline double er_reference(const LpSpace& space, const Vector& r, const Vector& phi, double nr) {
  Vector z(r.size());
  auto obj = [&](double lam) {
    z = r - lam * phi;
    return norm_of(space, z);
  };
  return dense_line_min(obj, 0.0, 2.0 * nr / norm_of(space, phi)).value;
}

}  // namespace detail

inline RunReport run_greedy(Algorithm algo, const Vector& f, const Dictionary& D,
                            const WeaknessSchedule& tau, const SolverConfig& cfg, int max_m,
                            double stop_tol, const RunOptions& opts = {}) {
  cfg.validate();
  if (max_m < 0) throw StructuralError("max_m must be nonnegative");
  if (!(stop_tol >= 0.0)) throw StructuralError("stop_tol must be nonnegative");
  const LpSpace& space = D.space;
  const bool approx = is_approximate(algo);
  const Algorithm base = exact_counterpart(algo);
  const ErrorSchedule errs = opts.errors.value_or(ErrorSchedule{});

  RunReport rep;
  rep.algorithm = to_string(algo);
  rep.space = space.spec();
  rep.dictionary = D.spec();
  rep.target = opts.target_spec;
  if (opts.target) {
    rep.has_certificate = opts.target->has_certificate;
    rep.eps = opts.target->eps;
    rep.a_eps = opts.target->a_eps;
    rep.noise_norm = opts.target->noise_norm;
  }
  rep.weakness = base == Algorithm::rrxga ? "const:1" : tau.spec();
  rep.selection = to_string(opts.rule);
  if (approx) rep.errors = errs.spec();
  rep.solver = cfg;
  rep.max_m = max_m;
  rep.stop_tol = stop_tol;
  rep.seed = opts.seed;
  if (base == Algorithm::wrga && !rep.has_certificate)
    rep.warnings.push_back("wrga target carries no A_1 certificate");

  GreedyState s = GreedyState::start(space, f);
  rep.initial_norm = s.residual_norm;
  if (s.residual_norm <= stop_tol) {
    rep.termination = "already exact";
    return rep;
  }

  auto t_at = [&](int m) { return base == Algorithm::rrxga ? 1.0 : tau.at(m); };
  auto delta_at = [&](int m, double residual_norm) {
    if (!approx) return 0.0;
    if (errs.delta.is_auto())
      return std::min(1.0, prop72_threshold(space, residual_norm, t_at(m + 1)));
    return errs.delta.at(m);
  };
  auto functional_for = [&](const Vector& r, int m, double delta, double* achieved) {
    if (!approx) {
      *achieved = 0.0;
      return norming_functional(space, r);
    }
    PerturbedFunctional pf =
        perturbed_functional(space, r, delta, detail::mix_seed(opts.seed, m, 0x64));
    *achieved = pf.achieved_delta;
    return pf.functional;
  };

  rep.initial_delta = delta_at(0, s.residual_norm);
  DualFunctional F = functional_for(s.residual, 0, rep.initial_delta, &rep.initial_achieved_delta);
  rep.termination = "max_iters";

  for (int m = 1; m <= max_m; ++m) {
    IterationRecord rec;
    rec.m = m;
    rec.t_m = t_at(m);
    rec.prev_norm = s.residual_norm;
    const Selection sel = greedy_select(F, D, rec.t_m, opts.rule);
    if (!(sel.dict_norm > 0.0)) {
      rep.termination = "stalled";
      break;
    }
    rec.dict_norm = sel.dict_norm;
    rec.gs_lhs = sel.value;
    rec.gs_rhs = rec.t_m * sel.dict_norm;
    const Vector f_prev = s.residual;

    const auto t0 = std::chrono::steady_clock::now();
    StepInfo info;
    if (approx && errs.eta.is_auto()) {
      // eta_m must respect a threshold in ||f_m||, known only after the step.
      const GreedyState saved = s;
      double eta = std::min(1.0, prop72_threshold(space, rec.prev_norm, rec.t_m));
      for (int attempt = 0;; ++attempt) {
        s = saved;
        info = advance(algo, s, D, sel, cfg, {eta, detail::mix_seed(opts.seed, m, attempt)});
        const double limit = prop72_threshold(space, s.residual_norm, rec.t_m);
        if (eta <= limit) break;
        if (attempt >= 8) {
          s = saved;
          eta = 0.0;
          info = advance(algo, s, D, sel, cfg, {});
          break;
        }
        eta = 0.5 * std::min(eta, limit);
      }
      rec.eta_m = eta;
      rec.schedule_violation = eta > prop72_threshold(space, s.residual_norm, rec.t_m);
    } else {
      rec.eta_m = approx ? errs.eta.at(m) : 0.0;
      info = advance(algo, s, D, sel, cfg, {rec.eta_m, detail::mix_seed(opts.seed, m, 1)});
    }
    const auto t1 = std::chrono::steady_clock::now();
    if (opts.record_timings)
      rec.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();

    rec.selected_index = s.selected.back();
    rec.lambda = info.lambda;
    rec.omega = info.omega;
    rec.mu = info.mu;
    rec.solver_converged = info.converged;
    rec.dual_choice_value = info.dual_choice_value;
    if (base == Algorithm::rrxga && rec.selected_index != sel.index) {
      // Condition (1) is measured for the atom actually taken.
      rec.gs_lhs = F.coords.dot(D.element(rec.selected_index));
    }
    const Vector phi = D.element(rec.selected_index);
    rec.er_reference = detail::er_reference(space, f_prev, phi, rec.prev_norm);
    rec.neg_lambda_margin = detail::neg_lambda_margin(space, f_prev, phi, rec.prev_norm);
    rec.residual_norm = s.residual_norm;
    rec.g_norm = detail::norm_of(space, s.G);
    rec.exact = s.residual_norm <= stop_tol;
    rec.bj_margin = detail::bj_margin(space, s.residual, s.G, s.residual_norm);

    if (!rec.exact) {
      rec.delta_m = delta_at(m, s.residual_norm);
      F = functional_for(s.residual, m, rec.delta_m, &rec.achieved_delta);
      rec.bo_abs = std::fabs(F.coords.dot(s.G));
    }
    if (approx) {
      if (errs.eps_derived) {
        rec.eps_m = eps_bound_prop61(space, rec.delta_m, rec.eta_m, rec.g_norm);
      } else {
        const auto& L = errs.eps_list;
        rec.eps_m = L.empty() ? 0.0 : L[std::min<std::size_t>(m - 1, L.size() - 1)];
      }
    }
    rep.records.push_back(rec);
    if (rec.exact) {
      rep.termination = "converged";
      break;
    }
  }
  return rep;
}

/// Driver for the approximate class: perturbed functionals in selection,
/// relaxed minimisation in the step.
inline RunReport run_awbga(Algorithm algo, const Vector& f, const Dictionary& D,
                           const WeaknessSchedule& tau, const ErrorSchedule& errs,
                           const SolverConfig& cfg, int max_m, double stop_tol,
                           RunOptions opts = {}) {
  if (!is_approximate(algo)) throw StructuralError("run_awbga expects awcga, awgafr or arwrga");
  opts.errors = errs;
  return run_greedy(algo, f, D, tau, cfg, max_m, stop_tol, opts);
}

}  // namespace wbga

#endif  // WBGA_ALGORITHMS_HPP

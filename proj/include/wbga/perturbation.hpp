#ifndef WBGA_PERTURBATION_HPP
#define WBGA_PERTURBATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>

#include "config.hpp"
#include "schedule.hpp"
#include "space.hpp"

namespace wbga {

/// An admissible inexact functional: ||F|| <= 1 and F(f) >= (1 - delta)||f||.
struct PerturbedFunctional {
  DualFunctional functional;
  double achieved_delta = 0.0;  // 1 - F(f)/||f||
  double mix = 0.0;             // weight of the random component
};

namespace detail {

inline double relative_pairing(const DualFunctional& F, const Vector& f, double nf) {
  return F.coords.dot(f) / nf;
}

/// Scales coords so its dual norm does not exceed one.
inline DualFunctional unit_dual(const LpSpace& space, Vector coords) {
  DualFunctional F = make_functional(space, std::move(coords));
  if (F.norm_bound > 0.0) {
    F.coords /= F.norm_bound;
    F.norm_bound = dual_norm(space, F.coords);
    if (F.norm_bound > 1.0) {
      F.coords /= F.norm_bound;
      F.norm_bound = dual_norm(space, F.coords);
    }
  }
  return F;
}

}  // namespace detail

/// Mixes the norming functional of f with a random unit dual vector R and
/// keeps the largest mixing weight s for which the normalised mixture still
/// satisfies F(f) >= (1 - delta)||f||, so the admissible slack is nearly
/// exhausted.
inline PerturbedFunctional perturbed_functional(const LpSpace& space, const Vector& f,
                                                double delta, std::uint64_t seed) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::domain_error("delta must lie in [0, 1]");
  const double nf = norm(space, f);
  if (nf == 0.0) throw std::domain_error("norming functional of zero undefined");
  PerturbedFunctional out;
  out.functional = norming_functional(space, f);
  out.achieved_delta =
      std::max(0.0, 1.0 - detail::relative_pairing(out.functional, f, nf));
  if (delta == 0.0) return out;

  Rng rng = make_rng(seed, 0x70657274);
  Vector R = gaussian_vector(rng, space.n);
  R /= lr_norm(R, space.p_dual);
  const Vector& c0 = out.functional.coords;
  const double floor_value = 1.0 - delta;
  auto build = [&](double s) { return detail::unit_dual(space, (1.0 - s) * c0 + s * R); };
  auto feasible = [&](const DualFunctional& F) {
    return F.norm_bound > 0.0 && detail::relative_pairing(F, f, nf) >= floor_value;
  };

  double lo = 0.0, hi = 1.0;
  DualFunctional best = out.functional;
  DualFunctional at_hi = build(hi);
  if (feasible(at_hi)) {
    best = at_hi;
    lo = hi;
  } else {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      DualFunctional F = build(mid);
      if (feasible(F)) {
        lo = mid;
        best = std::move(F);
      } else {
        hi = mid;
      }
    }
  }
  out.functional = std::move(best);
  out.mix = lo;
  out.achieved_delta = std::max(0.0, 1.0 - detail::relative_pairing(out.functional, f, nf));
  return out;
}

struct VecMin {
  Vector arg;
  double value = 0.0;
};

using VecFn = std::function<double(const Vector&)>;

/// Inexact minimisation with relative slack eta. The exact solution (arg*, v*)
/// comes from `exact`; the returned argument lies on a random ray from arg*,
/// at the point where the objective has used half of the budget
/// (1 + eta) v*. Coordinates with a finite entry in `lower` stay above it.
inline VecMin relaxed_minimize(const VecFn& objective, double eta,
                               const std::function<VecMin()>& exact, std::uint64_t seed,
                               const std::optional<Vector>& lower = std::nullopt) {
  if (!(eta >= 0.0)) throw std::domain_error("eta must be nonnegative");
  VecMin best = exact();
  if (eta == 0.0 || best.value <= 0.0 || best.arg.size() == 0) return best;
  const double target = best.value * (1.0 + 0.5 * eta);

  Rng rng = make_rng(seed, 0x72656c61);
  Vector dir = gaussian_vector(rng, best.arg.size());
  double s_max = std::numeric_limits<double>::infinity();
  if (lower) {
    for (Eigen::Index i = 0; i < dir.size(); ++i) {
      if (!std::isfinite((*lower)[i])) continue;
      if (best.arg[i] <= (*lower)[i] && dir[i] < 0.0) dir[i] = -dir[i];
    }
  }
  const double nd = dir.norm();
  if (nd == 0.0) return best;
  dir /= nd;
  if (lower) {
    for (Eigen::Index i = 0; i < dir.size(); ++i) {
      if (!std::isfinite((*lower)[i]) || dir[i] >= 0.0) continue;
      s_max = std::min(s_max, (best.arg[i] - (*lower)[i]) / -dir[i]);
    }
  }
  auto at = [&](double s) {
    Vector x = best.arg + s * dir;
    if (lower) {
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (std::isfinite((*lower)[i])) x[i] = std::max(x[i], (*lower)[i]);
    }
    return x;
  };

  const double scale = std::max(1.0, best.arg.cwiseAbs().maxCoeff());
  double lo = 0.0, hi = std::min(1e-8 * scale, s_max);
  while (objective(at(hi)) <= target) {
    lo = hi;
    if (hi >= s_max || hi > 1e12 * scale) break;
    hi = std::min(2.0 * hi, s_max);
  }
  if (lo < hi) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (objective(at(mid)) <= target ? lo : hi) = mid;
    }
  }
  VecMin walked{at(lo), 0.0};
  walked.value = objective(walked.arg);
  // Numerical noise may land a hair below v*; the exact point is then kept.
  if (!(walked.value >= best.value) || walked.value > target) return best;
  return walked;
}

/// Biorthogonality slack inf_{lambda>0} (delta + eta + 2 rho(lambda ||G||))/lambda
/// with rho(u) = gamma u^q, in closed form.
inline double eps_bound_prop61(const LpSpace& space, double delta, double eta, double g_norm) {
  const double d = delta + eta;
  if (d <= 0.0 || g_norm <= 0.0) return 0.0;
  const double q = space.q, p = space.p_conj;
  return q * std::pow(q - 1.0, -1.0 / p) * std::pow(d, 1.0 / p) *
         std::pow(2.0 * space.gamma, 1.0 / q) * g_norm;
}

/// Minimiser of the slack expression above.
inline double eps_bound_argmin(const LpSpace& space, double delta, double eta, double g_norm) {
  const double d = delta + eta;
  if (d <= 0.0 || g_norm <= 0.0) return 0.0;
  const double q = space.q;
  return std::pow(d / ((q - 1.0) * 2.0 * space.gamma * std::pow(g_norm, q)), 1.0 / q);
}

/// 64^{-p} gamma^{1-p} ||f||^p t^p with p = p_conj: the admissible size of
/// delta_m (with t = t_{m+1}) and of eta_m (with t = t_m) under which the
/// perturbed rate bound keeps the exact-class form.
inline double prop72_threshold(const LpSpace& space, double residual_norm, double t) {
  const double p = space.p_conj;
  return std::pow(64.0, -p) * std::pow(space.gamma, 1.0 - p) * std::pow(residual_norm * t, p);
}

}  // namespace wbga

#endif  // WBGA_PERTURBATION_HPP

#ifndef WBGA_SPACE_HPP
#define WBGA_SPACE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "spec_string.hpp"

namespace wbga {

/// Finite-dimensional l_p^n with 1 < p < inf.
///
/// `q` and `gamma` describe the power-type bound rho(u) <= gamma * u^q of the
/// modulus of smoothness; `p_conj = q / (q - 1)` is the exponent that appears
/// in the rate bounds. It is unrelated to the norm exponent `p`.
struct LpSpace {
  int n = 0;
  double p = 2.0;
  double q = 2.0;
  double gamma = 0.5;
  double p_conj = 2.0;
  double p_dual = 2.0;  // Hoelder conjugate of p, the exponent of the dual norm

  static LpSpace make(double p, int n) {
    if (!(p > 1.0) || !std::isfinite(p))
      throw StructuralError("space not uniformly smooth: p must lie in (1, inf)");
    if (n <= 0) throw StructuralError("space dimension must be positive");
    LpSpace s;
    s.n = n;
    s.p = p;
    if (p <= 2.0) {
      s.q = p;
      s.gamma = 1.0 / p;
    } else {
      s.q = 2.0;
      s.gamma = (p - 1.0) / 2.0;
    }
    s.p_conj = s.q / (s.q - 1.0);
    s.p_dual = p / (p - 1.0);
    return s;
  }

  std::string spec() const {
    std::ostringstream os;
    os.precision(17);
    os << "lp:p=" << p << ",n=" << n;
    return os.str();
  }

  bool operator==(const LpSpace& o) const { return n == o.n && p == o.p; }
};

inline LpSpace parse_space_spec(const std::string& text) {
  SpecString s = parse_spec_string(text, "lp", false);
  if (text.rfind("lp:", 0) != 0) throw StructuralError("space spec must start with 'lp:'");
  const double p = s.number("p");
  const auto n = s.integer("n");
  if (n <= 0 || n > (1 << 24)) throw StructuralError("field 'n': dimension out of range");
  return LpSpace::make(p, static_cast<int>(n));
}

inline void require_dim(const LpSpace& space, const Vector& x) {
  if (x.size() != space.n)
    throw StructuralError("dimension mismatch: element has " + std::to_string(x.size()) +
                          " coordinates, space has n=" + std::to_string(space.n));
}

/// l_r norm with scaling by the largest coordinate to stay clear of
/// overflow and underflow.
inline double lr_norm(const Vector& x, double r) {
  const double big = x.cwiseAbs().maxCoeff();
  if (big == 0.0 || x.size() == 0) return 0.0;
  if (r == 2.0) return big * (x / big).norm();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) sum += abs_pow(x[i] / big, r);
  return big * std::pow(sum, 1.0 / r);
}

inline double norm(const LpSpace& space, const Vector& x) {
  require_dim(space, x);
  return lr_norm(x, space.p);
}

/// A bounded linear functional on l_p^n in coordinates; application is the
/// dot product. `norm_bound` is its measured dual norm.
struct DualFunctional {
  Vector coords;
  double norm_bound = 0.0;
};

inline double dual_norm(const LpSpace& space, const Vector& coords) {
  require_dim(space, coords);
  return lr_norm(coords, space.p_dual);
}

inline DualFunctional make_functional(const LpSpace& space, Vector coords) {
  DualFunctional F;
  F.norm_bound = dual_norm(space, coords);
  F.coords = std::move(coords);
  return F;
}

/// F_f(g) = sum sign(f_i) |f_i|^{p-1} g_i / ||f||^{p-1}, the unique norming
/// functional of a nonzero f.
inline DualFunctional norming_functional(const LpSpace& space, const Vector& f) {
  const double nf = norm(space, f);
  if (nf == 0.0) throw std::domain_error("norming functional of zero undefined");
  const double e = space.p - 1.0;
  Vector c(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) c[i] = sign_of(f[i]) * abs_pow(f[i] / nf, e);
  return make_functional(space, std::move(c));
}

inline double apply_functional(const DualFunctional& F, const Vector& g) {
  if (F.coords.size() != g.size()) throw StructuralError("dimension mismatch in functional pairing");
  return F.coords.dot(g);
}

/// gamma * u^q, the proven upper bound on the modulus of smoothness.
inline double smoothness_bound(const LpSpace& space, double u) {
  return space.gamma * abs_pow(u, space.q);
}

/// Monte-Carlo lower estimate of rho(u). The unit pairs are drawn once, so the
/// estimate is a maximum of convex even functions of u and s(u) = rho(u)/u is
/// nondecreasing, which `xi_root` relies on.
class ModulusSampler {
 public:
  ModulusSampler(const LpSpace& space, int n_samples, std::uint64_t seed) : space_(space) {
    const int n = space.n;
    auto push_unit = [&](Vector x, Vector y) {
      x /= lr_norm(x, space.p);
      y /= lr_norm(y, space.p);
      xs_.push_back(std::move(x));
      ys_.push_back(std::move(y));
    };
    // x = y gives rho(2) >= 1; the two-coordinate pairs are the extremal
    // configurations for l_p.
    Vector e1 = Vector::Zero(n);
    e1[0] = 1.0;
    push_unit(e1, e1);
    if (n >= 2) {
      Vector e2 = Vector::Zero(n);
      e2[1] = 1.0;
      push_unit(e1, e2);
      push_unit(e1 + e2, e1 - e2);
    }
    Rng rng = make_rng(seed, 0x6d6f64);
    for (int k = 0; k < n_samples; ++k) {
      Vector x = gaussian_vector(rng, n);
      Vector y = gaussian_vector(rng, n);
      if (x.isZero() || y.isZero()) continue;
      push_unit(std::move(x), std::move(y));
    }
  }

  double operator()(double u) const {
    double best = 0.0;
    for (std::size_t k = 0; k < xs_.size(); ++k) {
      const double plus = lr_norm(xs_[k] + u * ys_[k], space_.p);
      const double minus = lr_norm(xs_[k] - u * ys_[k], space_.p);
      best = std::max(best, 0.5 * (plus + minus) - 1.0);
    }
    return best;
  }

 private:
  LpSpace space_;
  std::vector<Vector> xs_;
  std::vector<Vector> ys_;
};

inline double empirical_modulus(const LpSpace& space, double u, int n_samples, std::uint64_t seed) {
  return ModulusSampler(space, n_samples, seed)(u);
}

enum class RhoMode { power_bound, empirical };

struct EmpiricalOptions {
  int n_samples = 256;
  std::uint64_t seed = 0;
};

namespace detail {
inline void check_xi_args(double t, double theta) {
  if (!(t > 0.0 && t <= 1.0)) throw std::domain_error("xi_root: t must lie in (0, 1]");
  if (!(theta > 0.0 && theta <= 0.5)) throw std::domain_error("xi_root: theta must lie in (0, 1/2]");
}
}  // namespace detail

/// Root of gamma * u^q = theta * t * u, bisected on s(u) = gamma u^{q-1} down
/// to adjacent doubles. Equals (theta t / gamma)^{1/(q-1)} when that is <= 2.
inline double xi_root_power(double q, double gamma, double t, double theta) {
  detail::check_xi_args(t, theta);
  const double target = theta * t;
  auto s = [&](double u) { return gamma * std::pow(u, q - 1.0); };
  double lo = 0.0, hi = 2.0;
  if (s(hi) <= target) return hi;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (s(mid) < target ? lo : hi) = mid;
  }
  return hi;
}

/// Root of rho(u) = theta * t * u on (0, 2], by bisection on the increasing
/// map s(u) = rho(u)/u.
inline double xi_root(const LpSpace& space, RhoMode mode, double t, double theta,
                      EmpiricalOptions opts = {}) {
  detail::check_xi_args(t, theta);
  if (mode == RhoMode::power_bound) return xi_root_power(space.q, space.gamma, t, theta);
  const double target = theta * t;
  ModulusSampler rho(space, opts.n_samples, opts.seed);
  auto s = [&](double u) { return rho(u) / u; };
  double lo = 1e-12, hi = 2.0;
  if (s(lo) >= target) return lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (s(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace wbga

#endif  // WBGA_SPACE_HPP

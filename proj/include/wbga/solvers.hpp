#ifndef WBGA_SOLVERS_HPP
#define WBGA_SOLVERS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "config.hpp"
#include "space.hpp"

namespace wbga {

struct SolverConfig {
  double tol = 1e-8;        // on the argument
  double grad_tol = 1e-10;  // on |F_r(phi_k)| in projections
  int max_iters = 500;
  double bracket_growth = 2.0;
  double initial_step = 1.0;

  void validate() const {
    if (!(tol > 0.0 && tol < 1.0) || !(grad_tol > 0.0 && grad_tol < 1.0) || max_iters <= 0 ||
        !(bracket_growth > 1.0) || !(initial_step > 0.0))
      throw StructuralError("invalid solver configuration");
  }
};

struct ScalarMin {
  double arg = 0.0;
  double value = 0.0;
};

using ScalarFn = std::function<double(double)>;

/// Golden-section search on [lo, hi]. The returned value never exceeds
/// objective(lo) or objective(hi).
inline ScalarMin line_search(const ScalarFn& objective, double lo, double hi,
                             const SolverConfig& cfg = {}) {
  if (lo > hi) throw std::invalid_argument("line_search: lo > hi");
  const double width_tol = cfg.tol * std::max(1.0, hi - lo);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = objective(c), fd = objective(d);
  for (int it = 0; it < std::max(cfg.max_iters, 200) && (b - a) > width_tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  ScalarMin best{0.5 * (a + b), objective(0.5 * (a + b))};
  for (auto [x, fx] : {std::pair{c, fc}, std::pair{d, fd}, std::pair{lo, objective(lo)},
                       std::pair{hi, objective(hi)}}) {
    if (fx < best.value) best = {x, fx};
  }
  return best;
}

/// Line search for a convex objective whose derivative is available. The
/// derivative is nondecreasing, so its sign change is located by
/// Illinois-style regula falsi; this reaches the minimiser to near machine
/// precision where value comparisons alone stall around sqrt(eps).
inline ScalarMin line_search(const ScalarFn& objective, const ScalarFn& derivative, double lo,
                             double hi, const SolverConfig& cfg = {}) {
  if (lo > hi) throw std::invalid_argument("line_search: lo > hi");
  const double f_lo = objective(lo);
  if (lo == hi) return {lo, f_lo};
  double a = lo, b = hi;
  double da = derivative(a), db = derivative(b);
  if (da >= 0.0) return {lo, f_lo};
  if (db <= 0.0) return {hi, objective(hi)};
  int side = 0;
  for (int it = 0; it < std::max(cfg.max_iters, 200); ++it) {
    double x = (a * db - b * da) / (db - da);
    if (!(x > a && x < b)) x = 0.5 * (a + b);
    const double dx = derivative(x);
    if (dx == 0.0) {
      a = b = x;
      break;
    }
    if (dx < 0.0) {
      a = x;
      da = dx;
      if (side == -1) db *= 0.5;
      side = -1;
    } else {
      b = x;
      db = dx;
      if (side == 1) da *= 0.5;
      side = 1;
    }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::fabs(a), std::fabs(b)}))
      break;
  }
  const double x = 0.5 * (a + b);
  ScalarMin best{x, objective(x)};
  if (f_lo < best.value) best = {lo, f_lo};
  const double f_hi = objective(hi);
  if (f_hi < best.value) best = {hi, f_hi};
  return best;
}

/// Expands hi geometrically from `start` until the objective fails to
/// decrease twice in a row; the minimiser of a convex objective then lies in
/// [lo, hi]. Values equal within a relative 1e-15 count as non-decreasing, so
/// flat tails still terminate.
inline std::pair<double, double> bracket_minimum(const ScalarFn& objective, double start,
                                                 const SolverConfig& cfg = {}) {
  auto not_lower = [](double next, double prev) {
    return next >= prev - 1e-15 * std::max(1.0, std::fabs(prev));
  };
  double step = cfg.initial_step;
  double x_prev = start, f_prev = objective(start);
  double x_before = start;
  int rises = 0;
  while (true) {
    const double x = x_prev + step;
    if (x > 1e12) throw std::runtime_error("no bracket found");
    const double fx = objective(x);
    if (not_lower(fx, f_prev)) {
      if (++rises == 2) return {x_before, x};
      // keep x_prev as the best point; probe once more past it
    } else {
      rises = 0;
      x_before = x_prev;
      x_prev = x;
      f_prev = fx;
    }
    step *= cfg.bracket_growth;
  }
}

/// Two-sided bracket around `center` for a convex objective on the real line.
inline std::pair<double, double> bracket_two_sided(const ScalarFn& objective, double center,
                                                   const SolverConfig& cfg = {}) {
  const double h = cfg.initial_step;
  const double f0 = objective(center);
  if (objective(center + h) < f0) {
    auto [lo, hi] = bracket_minimum(objective, center, cfg);
    return {lo, hi};
  }
  if (objective(center - h) < f0) {
    auto mirrored = [&](double s) { return objective(2.0 * center - s); };
    auto [lo, hi] = bracket_minimum(mirrored, center, cfg);
    return {2.0 * center - hi, 2.0 * center - lo};
  }
  return {center - h, center + h};
}

/// Independent reference minimiser: `grid` equispaced samples on [lo, hi],
/// then golden section on the two cells around the best sample.
inline ScalarMin dense_line_min(const ScalarFn& objective, double lo, double hi, int grid = 512,
                                const SolverConfig& cfg = {}) {
  if (lo > hi) throw std::invalid_argument("dense_line_min: lo > hi");
  if (lo == hi) return {lo, objective(lo)};
  const double h = (hi - lo) / grid;
  int best_k = 0;
  double best = objective(lo);
  for (int k = 1; k <= grid; ++k) {
    const double v = objective(lo + k * h);
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  const double a = lo + std::max(0, best_k - 1) * h;
  const double b = lo + std::min(grid, best_k + 1) * h;
  ScalarMin refined = line_search(objective, a, b, cfg);
  if (best < refined.value) return {lo + best_k * h, best};
  return refined;
}

// ---------------------------------------------------------------------------
// Residual-norm objectives

/// ||z|| and F_z(g) in one pass; F_z(g) is 0 when z = 0.
inline std::pair<double, double> norm_and_pairing(const LpSpace& space, const Vector& z,
                                                  const Vector& g) {
  const double big = z.cwiseAbs().maxCoeff();
  if (big == 0.0) return {0.0, 0.0};
  const double p = space.p;
  double sum = 0.0, pair = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double u = z[i] / big;
    const double a = abs_pow(u, p - 1.0);
    sum += a * std::fabs(u);
    pair += (u >= 0.0 ? a : -a) * g[i];
  }
  const double nz = std::pow(sum, 1.0 / p);
  // F_z(g) = sum sign(z)|z|^{p-1} g / ||z||^{p-1}, written in the scaled u = z/big.
  return {big * nz, pair / abs_pow(nz, p - 1.0)};
}

/// argmin over lambda in [lo, hi] of ||r - lambda g||.
inline ScalarMin minimize_residual_line(const LpSpace& space, const Vector& r, const Vector& g,
                                        double lo, double hi, const SolverConfig& cfg = {}) {
  Vector z(r.size());
  auto value = [&](double lam) {
    z = r - lam * g;
    return lr_norm(z, space.p);
  };
  auto deriv = [&](double lam) {
    z = r - lam * g;
    return -norm_and_pairing(space, z, g).second;
  };
  return line_search(value, deriv, lo, hi, cfg);
}

/// argmin over lambda >= 0 of ||r - lambda g||, using the bracket
/// [0, 2||r||/||g||] outside of which the objective exceeds ||r||.
inline ScalarMin minimize_residual_ray(const LpSpace& space, const Vector& r, const Vector& g,
                                       const SolverConfig& cfg = {}) {
  const double nr = lr_norm(r, space.p), ng = lr_norm(g, space.p);
  if (nr == 0.0 || ng == 0.0) return {0.0, nr};
  return minimize_residual_line(space, r, g, 0.0, 2.0 * nr / ng, cfg);
}

/// argmin over mu in R of ||f - mu h||; the bracket is grown around mu = 1.
inline ScalarMin minimize_rescale(const LpSpace& space, const Vector& f, const Vector& h,
                                  const SolverConfig& cfg = {}) {
  const double nh = lr_norm(h, space.p);
  if (nh == 0.0) return {1.0, lr_norm(f, space.p)};
  Vector z(f.size());
  auto value = [&](double mu) {
    z = f - mu * h;
    return lr_norm(z, space.p);
  };
  SolverConfig bc = cfg;
  bc.initial_step = std::min(cfg.initial_step, 0.25 * std::max(1e-12, lr_norm(f, space.p) / nh));
  auto [lo, hi] = bracket_two_sided(value, 1.0, bc);
  auto deriv = [&](double mu) {
    z = f - mu * h;
    return -norm_and_pairing(space, z, h).second;
  };
  return line_search(value, deriv, lo, hi, cfg);
}

// ---------------------------------------------------------------------------
// Two-dimensional relaxation search

struct Min2d {
  double w = 0.0;
  double lambda = 0.0;
  double value = 0.0;
  int sweeps = 0;
};

using Fn2d = std::function<double(double, double)>;

/// Cyclic coordinate descent over w in R and lambda >= lambda_lo. Each
/// coordinate is minimised by bracketing plus golden section; stops once a
/// sweep lowers the value by less than cfg.tol.
inline Min2d minimize_2d(const Fn2d& objective, const SolverConfig& cfg = {}, double w0 = 0.0,
                         double lambda0 = 0.0, double lambda_lo = 0.0) {
  Min2d cur{w0, std::max(lambda0, lambda_lo), 0.0, 0};
  cur.value = objective(cur.w, cur.lambda);
  SolverConfig inner = cfg;
  for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
    const double before = cur.value;
    {
      auto fw = [&](double w) { return objective(w, cur.lambda); };
      auto [lo, hi] = bracket_two_sided(fw, cur.w, inner);
      ScalarMin m = line_search(fw, lo, hi, inner);
      if (m.value <= cur.value) {
        cur.w = m.arg;
        cur.value = m.value;
      }
    }
    {
      auto fl = [&](double s) { return objective(cur.w, lambda_lo + s); };
      const double s0 = cur.lambda - lambda_lo;
      std::pair<double, double> br;
      if (s0 > 0.0) {
        br = bracket_two_sided(fl, s0, inner);
        br.first = std::max(br.first, 0.0);
      } else {
        br = bracket_minimum(fl, 0.0, inner);
      }
      ScalarMin m = line_search(fl, br.first, br.second, inner);
      if (m.value <= cur.value) {
        cur.lambda = lambda_lo + m.arg;
        cur.value = m.value;
      }
    }
    cur.sweeps = sweep + 1;
    if (before - cur.value < cfg.tol) break;
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Chebyshev projection

struct Projection {
  Vector coeffs;
  Vector G;
  Vector residual;
  double residual_norm = 0.0;
  double max_pairing = 0.0;  // max_k |F_residual(phi_k)|
  int iterations = 0;
  bool converged = false;
  bool exact = false;  // residual norm reached 1e-12
};

namespace detail {

/// Coefficients of the l_p projection for p < 2 through the dual problem
/// min { sum |y_i|^{p'}/p' - <f, y> : Phi^T y = 0 }, whose minimiser y gives
/// the optimal residual r = sign(y)|y|^{p'-1}. Newton in null-space
/// coordinates, started from the residual of `init`.
inline Vector dual_projection_coeffs(const LpSpace& space, const Vector& f, const Matrix& basis,
                                     const Vector& init, const SolverConfig& cfg) {
  const double p = space.p, pd = p / (p - 1.0);
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  const Eigen::Index rank = qr.rank(), n = basis.rows();
  if (rank >= n) return qr.solve(f);
  const Matrix Q = qr.householderQ();
  const Matrix N = Q.rightCols(n - rank);

  auto psi = [](const Vector& x, double e) {
    Vector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double a = abs_pow(x[i], e);
      out[i] = x[i] >= 0.0 ? a : -a;
    }
    return out;
  };
  const Vector Nf = N.transpose() * f;
  auto value = [&](const Vector& z) {
    const Vector y = N * z;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) sum += abs_pow(y[i], pd);
    return sum / pd - Nf.dot(z);
  };
  auto gradient = [&](const Vector& z) { return Vector(N.transpose() * psi(N * z, pd - 1.0) - Nf); };

  Vector z = N.transpose() * psi(f - basis * init, p - 1.0);
  double v = value(z);
  Vector g = gradient(z);
  const double scale = std::max(Nf.norm(), 1e-300);
  for (int it = 0; it < cfg.max_iters && g.norm() > 1e-15 * scale; ++it) {
    const Vector y = N * z;
    Vector w(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) w[i] = (pd - 1.0) * abs_pow(y[i], pd - 2.0);
    Matrix H = N.transpose() * w.asDiagonal() * N;
    H.diagonal().array() += 1e-14 * std::max(H.diagonal().maxCoeff(), 1e-300);
    Vector dir = -H.ldlt().solve(g);
    if (!dir.allFinite() || !(dir.dot(g) < 0.0)) dir = -g;
    bool accepted = false;
    for (double alpha = 1.0; alpha > 1e-12; alpha *= 0.5) {
      const Vector trial = z + alpha * dir;
      const double tv = value(trial);
      const Vector tg = gradient(trial);
      const bool descent = tv <= v + 1e-4 * alpha * g.dot(dir) && tv < v;
      const bool flat = std::fabs(tv - v) <= 16.0 * std::numeric_limits<double>::epsilon() *
                                                   std::max(std::fabs(v), 1e-300);
      if (descent || (flat && tg.norm() < 0.5 * g.norm())) {
        z = trial;
        v = tv;
        g = tg;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  return qr.solve(f - psi(N * z, pd - 1.0));
}

}  // namespace detail

/// Best approximation of f from span(basis columns) in l_p.
///
/// Descends h(c) = ||f - Phi c|| along damped Newton directions of
/// sum |r_i|^p / p, whose gradient is -||r||^{p-1} Phi^T F_r. Terminates when
/// every |F_r(phi_k)| <= cfg.grad_tol (biorthogonality of the residual to the
/// span) or when ||r|| <= 1e-12.
inline Projection chebyshev_project(const LpSpace& space, const Vector& f, const Matrix& basis,
                                    const SolverConfig& cfg = {},
                                    const std::optional<Vector>& init = std::nullopt) {
  require_dim(space, f);
  if (basis.cols() == 0) throw std::invalid_argument("chebyshev_project: empty basis");
  if (basis.rows() != space.n) throw StructuralError("dimension mismatch in projection basis");
  const double p = space.p;
  const Eigen::Index m = basis.cols();
  Projection out;
  out.coeffs = init ? *init : Vector::Zero(m);
  if (out.coeffs.size() != m) throw StructuralError("initial coefficient size mismatch");
  if (p < 2.0) {
    // Newton on the primal stalls where |r_i|^{p-2} blows up; the dual is C^2.
    const Vector c = detail::dual_projection_coeffs(space, f, basis, out.coeffs, cfg);
    if (c.allFinite() && lr_norm(f - basis * c, p) <= lr_norm(f - basis * out.coeffs, p))
      out.coeffs = c;
  }

  Vector r = f - basis * out.coeffs;
  double nr = lr_norm(r, p);
  Vector u(r.size()), s(r.size()), w(r.size());
  Matrix H(m, m);
  int stalls = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    out.iterations = it;
    if (nr <= 1e-12) {
      out.exact = out.converged = true;
      break;
    }
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      u[i] = r[i] / nr;
      const double a = abs_pow(u[i], p - 1.0);
      s[i] = u[i] >= 0.0 ? a : -a;
    }
    const Vector pairing = basis.transpose() * s;  // F_r(phi_k)
    out.max_pairing = pairing.cwiseAbs().maxCoeff();
    if (out.max_pairing <= cfg.grad_tol) {
      out.converged = true;
      break;
    }
    // Newton system in normalised coordinates: (Phi^T W Phi) d = ||r||/(p-1) Phi^T s.
    for (Eigen::Index i = 0; i < r.size(); ++i)
      w[i] = abs_pow(std::max(std::fabs(u[i]), 1e-8), p - 2.0);
    H.noalias() = basis.transpose() * w.asDiagonal() * basis;
    const double damping = 1e-12 * std::max(H.diagonal().maxCoeff(), 1e-300);
    H.diagonal().array() += damping;
    Vector dir = H.ldlt().solve(pairing) * (nr / (p - 1.0));
    if (!dir.allFinite()) dir = pairing * nr;
    const double slope = -pairing.dot(dir);  // directional derivative of h
    if (!(slope < 0.0)) dir = pairing * nr;

    double alpha = 1.0;
    bool accepted = false;
    Vector trial_c, trial_r;
    double trial_n = nr;
    auto trial_pairing = [&] {
      for (Eigen::Index i = 0; i < trial_r.size(); ++i) {
        const double ui = trial_r[i] / trial_n;
        const double a = abs_pow(ui, p - 1.0);
        s[i] = ui >= 0.0 ? a : -a;
      }
      return (basis.transpose() * s).cwiseAbs().maxCoeff();
    };
    for (int bt = 0; bt < 60; ++bt, alpha *= 0.5) {
      trial_c = out.coeffs + alpha * dir;
      trial_r = f - basis * trial_c;
      trial_n = lr_norm(trial_r, p);
      if (trial_n <= nr - 1e-4 * alpha * std::fabs(pairing.dot(dir)) && trial_n < nr) {
        accepted = true;
        break;
      }
      // Below rounding of the norm, the pairing is the measurable quantity.
      if (std::fabs(trial_n - nr) <= 16.0 * std::numeric_limits<double>::epsilon() * nr &&
          trial_n > 0.0 && trial_pairing() < 0.5 * out.max_pairing) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Rounding floor: take the full step if it does not increase the norm.
      trial_c = out.coeffs + dir;
      trial_r = f - basis * trial_c;
      trial_n = lr_norm(trial_r, p);
      if (trial_n > nr || ++stalls > 3) break;
    }
    out.coeffs = std::move(trial_c);
    r = std::move(trial_r);
    nr = trial_n;
  }
  out.residual = f - basis * out.coeffs;
  out.residual_norm = lr_norm(out.residual, p);
  out.G = f - out.residual;
  if (out.residual_norm <= 1e-12) {
    out.exact = out.converged = true;
    out.max_pairing = 0.0;
  } else {
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double ui = out.residual[i] / out.residual_norm;
      const double a = abs_pow(ui, p - 1.0);
      s[i] = ui >= 0.0 ? a : -a;
    }
    out.max_pairing = (basis.transpose() * s).cwiseAbs().maxCoeff();
    out.converged = out.max_pairing <= cfg.grad_tol;
  }
  return out;
}

}  // namespace wbga

#endif  // WBGA_SOLVERS_HPP

#ifndef WBGA_SELFTEST_HPP
#define WBGA_SELFTEST_HPP

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "algorithms.hpp"
#include "diagnostics.hpp"
#include "dictionary.hpp"
#include "harness.hpp"
#include "perturbation.hpp"
#include "solvers.hpp"
#include "space.hpp"

namespace wbga {

struct SelftestResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace selftest_detail {

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline bool close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b));
}

inline std::string show(double a, double b) {
  std::ostringstream os;
  os.precision(12);
  os << "got " << a << ", expected " << b;
  return os.str();
}

/// Least-squares residual norms of the orthogonal greedy algorithm computed
/// with normal equations.
inline std::vector<double> omp_residuals(const Matrix& atoms, const Vector& f, int steps) {
  std::vector<int> chosen;
  std::vector<double> out;
  Vector r = f;
  for (int m = 0; m < steps; ++m) {
    Eigen::Index best = 0;
    (atoms.transpose() * r).cwiseAbs().maxCoeff(&best);
    chosen.push_back(static_cast<int>(best));
    Matrix B(atoms.rows(), static_cast<Eigen::Index>(chosen.size()));
    for (std::size_t k = 0; k < chosen.size(); ++k) B.col(k) = atoms.col(chosen[k]);
    const Vector c = (B.transpose() * B).ldlt().solve(B.transpose() * f);
    r = f - B * c;
    out.push_back(r.norm());
  }
  return out;
}

}  // namespace selftest_detail

/// Oracle checks across all modules, each against an independent
/// computation or a closed form.
inline std::vector<SelftestResult> run_selftest() {
  using namespace selftest_detail;
  std::vector<SelftestResult> out;
  auto check = [&](const std::string& name, const std::function<std::string()>& body) {
    SelftestResult r{name, false, ""};
    try {
      r.detail = body();
      r.pass = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    out.push_back(r);
  };

  check("norm_l4", [] {
    const double v = norm(LpSpace::make(4, 2), vec({1, 1}));
    return close(v, std::pow(2.0, 0.25), 1e-14) ? "" : show(v, std::pow(2.0, 0.25));
  });
  check("norming_functional_l4", [] {
    const auto F = norming_functional(LpSpace::make(4, 2), vec({1, 1}));
    const double v = apply_functional(F, vec({1, 0}));
    return close(v, std::pow(2.0, -0.75), 1e-14) ? "" : show(v, std::pow(2.0, -0.75));
  });
  check("smoothness_bound_q15", [] {
    const double v = smoothness_bound(LpSpace::make(1.5, 2), 2.0);
    const double e = (2.0 / 3.0) * std::pow(2.0, 1.5);
    return close(v, e, 1e-14) ? "" : show(v, e);
  });
  check("empirical_modulus_hilbert", [] {
    const double v = empirical_modulus(LpSpace::make(2, 8), 1.0, 128, 5);
    return (v >= 0.0 && v <= std::sqrt(2.0) - 1.0 + 1e-12) ? "" : show(v, std::sqrt(2.0) - 1.0);
  });
  check("empirical_modulus_below_power_bound", [] {
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      const LpSpace s = LpSpace::make(p, 6);
      ModulusSampler rho(s, 64, 11);
      for (int k = 1; k <= 200; ++k) {
        const double u = 0.01 * k;
        if (rho(u) > smoothness_bound(s, u) + 1e-9) return show(rho(u), smoothness_bound(s, u));
      }
    }
    return std::string();
  });
  check("xi_root_closed_form", [] {
    const double v = xi_root(LpSpace::make(2, 2), RhoMode::power_bound, 1.0, 0.25);
    return close(v, 0.5, 1e-12) ? "" : show(v, 0.5);
  });
  check("xi_root_empirical_grid", [] {
    const LpSpace s = LpSpace::make(3, 4);
    const EmpiricalOptions o{64, 3};
    const double root = xi_root(s, RhoMode::empirical, 0.8, 0.25, o);
    ModulusSampler rho(s, o.n_samples, o.seed);
    double coarse = 2.0;
    for (int k = 1; k <= 2000; ++k) {
      if (rho(1e-3 * k) / (1e-3 * k) >= 0.2) {
        coarse = 1e-3 * k;
        break;
      }
    }
    double grid_root = coarse;
    for (int k = 0; k <= 10000; ++k) {
      const double u = std::max(1e-12, coarse - 1e-3 + 1e-7 * k);
      if (rho(u) / u >= 0.2) {
        grid_root = u;
        break;
      }
    }
    return std::fabs(root - grid_root) <= 1e-6 ? "" : show(root, grid_root);
  });
  check("dict_dual_norm_bruteforce", [] {
    const LpSpace s = LpSpace::make(3, 5);
    const Dictionary D = build_dictionary(s, "random_gauss", 50, 2);
    Rng rng = make_rng(9);
    const auto F = make_functional(s, gaussian_vector(rng, 5));
    double best = 0.0;
    for (int i = 1; i <= 50; ++i)
      for (int sgn : {1, -1}) best = std::max(best, F.coords.dot(D.element(sgn * i)));
    const double v = dict_dual_norm(F, D);
    return v == best ? "" : show(v, best);
  });
  check("greedy_select_threshold", [] {
    const LpSpace s = LpSpace::make(2, 6);
    const Dictionary D = build_dictionary(s, "random_gauss", 40, 4);
    Rng rng = make_rng(1);
    const auto F = make_functional(s, gaussian_vector(rng, 6));
    const Selection sel = greedy_select(F, D, 0.5, SelectionRule::threshold_first);
    const double v = F.coords.dot(D.element(sel.index));
    return v >= 0.5 * dict_dual_norm(F, D) - 1e-12 ? "" : show(v, 0.5 * dict_dual_norm(F, D));
  });
  check("a1_target_certificate", [] {
    const LpSpace s = LpSpace::make(2, 2);
    Dictionary D = build_dictionary(s, "canonical", 2, 0);
    Certificate c{{1, 2}, {0.6, 0.4}};
    const Vector f = combine(D, c);
    return close(norm(s, f), std::sqrt(0.52), 1e-15) ? "" : show(norm(s, f), std::sqrt(0.52));
  });
  check("perturb_target_distance", [] {
    const LpSpace s = LpSpace::make(3, 8);
    const Vector f = Vector::Ones(8) * 0.1;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const double d = norm(s, perturb_target(s, f, 0.1, seed) - f);
      if (d > 0.1) return show(d, 0.1);
    }
    return std::string();
  });
  check("line_search_hilbert_projection", [] {
    const LpSpace s = LpSpace::make(2, 2);
    const ScalarMin m = minimize_residual_ray(s, vec({1, 1}), vec({1, 0}));
    return close(m.arg, 1.0, 1e-8) && close(m.value, 1.0, 1e-12) ? "" : show(m.arg, 1.0);
  });
  check("minimize_2d_normal_equations", [] {
    const LpSpace s = LpSpace::make(2, 3);
    const Vector f = vec({0.3, -0.7, 0.5}), G = vec({0.2, 0.1, 0.0}), phi = vec({0.0, -0.6, 0.8});
    auto obj = [&](double w, double lam) { return norm(s, f - (1 - w) * G - lam * phi); };
    const Min2d m = minimize_2d(obj, SolverConfig{1e-12, 1e-12, 2000, 2.0, 1.0});
    Matrix B(3, 2);
    B << G, phi;
    const Vector c = (B.transpose() * B).ldlt().solve(B.transpose() * f);
    const double w = 1.0 - c[0], lam = std::max(0.0, c[1]);
    return close(m.w, w, 1e-6) && close(m.lambda, lam, 1e-6) ? "" : show(m.w, w);
  });
  check("chebyshev_l4_grid", [] {
    const LpSpace s = LpSpace::make(4, 2);
    Matrix B(2, 1);
    B << std::pow(2.0, -0.25), std::pow(2.0, -0.25);
    const Vector f = vec({1, 0});
    const Projection P = chebyshev_project(s, f, B);
    auto obj = [&](double lam) { return norm(s, f - lam * Vector(B.col(0))); };
    const ScalarMin g = dense_line_min(obj, -2.0, 2.0, 20000);
    return std::fabs(P.coeffs[0] - g.arg) <= 1e-6 ? "" : show(P.coeffs[0], g.arg);
  });
  check("wcga_hilbert_omp", [] {
    const LpSpace s = LpSpace::make(2, 64);
    const Dictionary D = build_dictionary(s, "random_gauss", 256, 7);
    const Target t = make_target(D, parse_target_spec("a1,k=16,seed=3"));
    const RunReport r =
        run_greedy(Algorithm::wcga, t.f, D, WeaknessSchedule{}, SolverConfig{}, 30, 1e-12);
    const auto oracle = omp_residuals(D.atoms, t.f, static_cast<int>(r.records.size()));
    for (std::size_t m = 0; m < r.records.size(); ++m)
      if (std::fabs(r.records[m].residual_norm - oracle[m]) > 1e-8 * std::max(oracle[m], 1e-300) &&
          std::fabs(r.records[m].residual_norm - oracle[m]) > 1e-12)
        return show(r.records[m].residual_norm, oracle[m]);
    return std::string();
  });
  check("wdga_matching_pursuit", [] {
    const LpSpace s = LpSpace::make(2, 5);
    const Dictionary D = build_dictionary(s, "canonical", 5, 0);
    const Vector f = vec({0.5, -0.2, 0.1, 0.15, -0.05});
    const RunReport r =
        run_greedy(Algorithm::wdga, f, D, WeaknessSchedule{}, SolverConfig{}, 5, 1e-12);
    Vector res = f;
    for (const auto& rec : r.records) {
      Eigen::Index k = 0;
      res.cwiseAbs().maxCoeff(&k);
      res[k] = 0.0;
      if (std::fabs(rec.residual_norm - res.norm()) > 1e-12) return show(rec.residual_norm, res.norm());
    }
    return std::string();
  });
  check("gg_step_length_hilbert", [] {
    const double v = gg_lambda(LpSpace::make(2, 2), 2.0, 0.6);
    return close(v, 2.0 * 0.6 / 2.0, 1e-15) ? "" : show(v, 0.6);
  });
  check("eps_bound_numeric", [] {
    const LpSpace s = LpSpace::make(2, 2);
    const double v = eps_bound_prop61(s, 0.005, 0.005, 1.0);
    auto expr = [&](double lam) { return (0.01 + 2.0 * smoothness_bound(s, lam)) / lam; };
    const ScalarMin m = dense_line_min(expr, 1e-4, 10.0, 100000);
    return close(v, 0.2, 1e-12) && close(m.value, 0.2, 1e-6) ? "" : show(v, m.value);
  });
  check("perturbed_functional_admissible", [] {
    const LpSpace s = LpSpace::make(3, 6);
    Rng rng = make_rng(2);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const Vector f = gaussian_vector(rng, 6);
      const auto pf = perturbed_functional(s, f, 0.1, seed);
      if (pf.functional.norm_bound > 1.0 + 1e-12) return show(pf.functional.norm_bound, 1.0);
      if (pf.functional.coords.dot(f) < 0.9 * norm(s, f)) return show(pf.achieved_delta, 0.1);
    }
    return std::string();
  });
  check("relaxed_minimize_budget", [] {
    auto obj = [](const Vector& x) { return 1.0 + (x[0] - 1.0) * (x[0] - 1.0); };
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const VecMin r = relaxed_minimize(
          obj, 0.05, [] { return VecMin{Vector::Constant(1, 1.0), 1.0}; }, seed);
      if (r.value < 1.0 || r.value > 1.05) return show(r.value, 1.05);
    }
    return std::string();
  });
  check("rate_constants", [] {
    const LpSpace s = LpSpace::make(2, 2);
    BoundSpec b = BoundSpec::make(BoundId::cor52, s);
    if (!close(rate_bound(b, 3, 3.0), 2.0, 1e-15)) return show(rate_bound(b, 3, 3.0), 2.0);
    b.id = BoundId::cor21;
    b.t = 0.5;
    if (!close(bound_constant(b), 16.0, 1e-14)) return show(bound_constant(b), 16.0);
    b.id = BoundId::thm72;
    if (!close(bound_constant(b), 8.0 * std::sqrt(2.0), 1e-14))
      return show(bound_constant(b), 8.0 * std::sqrt(2.0));
    return std::string();
  });
  check("csv_determinism", [] {
    RunRequest q;
    q.space = "lp:p=3,n=16";
    q.dictionary = "dict:random_gauss,N=48,seed=1";
    q.target = "target:a1,k=4,seed=2";
    q.algorithm = "rwrga";
    q.weakness = "const:1";
    q.max_m = 10;
    return csv_string(execute(q)) == csv_string(execute(q)) ? "" : "CSV differs between runs";
  });
  return out;
}

}  // namespace wbga

#endif  // WBGA_SELFTEST_HPP

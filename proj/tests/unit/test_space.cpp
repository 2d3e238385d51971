#include <cmath>

#include <gtest/gtest.h>

#include "wbga/space.hpp"

using namespace wbga;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST(Space, RejectsNonSmoothExponents) {
  EXPECT_THROW(LpSpace::make(1.0, 4), StructuralError);
  EXPECT_THROW(LpSpace::make(INFINITY, 4), StructuralError);
  EXPECT_THROW(LpSpace::make(0.5, 4), StructuralError);
  EXPECT_THROW(parse_space_spec("lp:p=1,n=8"), StructuralError);
}

TEST(Space, PowerTypeConstants) {
  const LpSpace a = LpSpace::make(1.5, 3);
  EXPECT_DOUBLE_EQ(a.q, 1.5);
  EXPECT_DOUBLE_EQ(a.gamma, 1.0 / 1.5);
  EXPECT_DOUBLE_EQ(a.p_conj, 3.0);
  const LpSpace b = LpSpace::make(4, 3);
  EXPECT_DOUBLE_EQ(b.q, 2.0);
  EXPECT_DOUBLE_EQ(b.gamma, 1.5);
  EXPECT_DOUBLE_EQ(b.p_conj, 2.0);
  for (double p : {1.2, 1.5, 2.0, 3.0, 7.0}) {
    const LpSpace s = LpSpace::make(p, 2);
    EXPECT_GE(s.gamma, std::pow(2.0, -s.q));
  }
}

TEST(Space, SpecRoundTrip) {
  const LpSpace s = parse_space_spec("lp:p=3,n=17");
  EXPECT_EQ(s.n, 17);
  EXPECT_EQ(parse_space_spec(s.spec()), s);
  EXPECT_THROW(parse_space_spec("p=3,n=17"), StructuralError);
  EXPECT_THROW(parse_space_spec("lp:p=3"), StructuralError);
  EXPECT_THROW(parse_space_spec("lp:p=x,n=3"), StructuralError);
}

TEST(Space, Norms) {
  EXPECT_DOUBLE_EQ(norm(LpSpace::make(2, 2), vec({3, 4})), 5.0);
  EXPECT_EQ(norm(LpSpace::make(3, 3), Vector::Zero(3)), 0.0);
  EXPECT_NEAR(norm(LpSpace::make(4, 2), vec({1, 1})), 1.189207115002721, 1e-15);
  EXPECT_THROW(norm(LpSpace::make(2, 3), vec({1, 2})), StructuralError);
  EXPECT_NEAR(norm(LpSpace::make(3, 2), vec({1e200, 1e200})), 1e200 * std::cbrt(2.0), 1e186);
}

TEST(Space, NormingFunctionalExamples) {
  const auto F = norming_functional(LpSpace::make(2, 2), vec({3, 4}));
  EXPECT_NEAR(F.coords[0], 0.6, 1e-15);
  EXPECT_NEAR(F.coords[1], 0.8, 1e-15);
  EXPECT_NEAR(apply_functional(F, vec({3, 4})), 5.0, 1e-14);

  const auto G = norming_functional(LpSpace::make(4, 2), vec({1, 1}));
  EXPECT_NEAR(G.coords[0], std::pow(2.0, -0.75), 1e-15);
  EXPECT_NEAR(apply_functional(G, vec({1, 0})), 0.5946035575013605, 1e-15);

  const auto H = norming_functional(LpSpace::make(1.5, 2), vec({-1, 0}));
  EXPECT_DOUBLE_EQ(H.coords[0], -1.0);
  EXPECT_DOUBLE_EQ(H.coords[1], 0.0);
  EXPECT_DOUBLE_EQ(apply_functional(H, vec({-1, 0})), 1.0);

  try {
    norming_functional(LpSpace::make(3, 2), Vector::Zero(2));
    FAIL();
  } catch (const std::domain_error& e) {
    EXPECT_STREQ(e.what(), "norming functional of zero undefined");
  }
}

TEST(Space, ApplyFunctionalExamples) {
  const auto F = make_functional(LpSpace::make(2, 2), vec({0.6, 0.8}));
  EXPECT_DOUBLE_EQ(apply_functional(F, vec({1, 0})), 0.6);
  EXPECT_DOUBLE_EQ(apply_functional(F, vec({3, 4})), 5.0);
  EXPECT_NEAR(apply_functional(F, vec({-4, 3})), 0.0, 1e-15);
  EXPECT_THROW(apply_functional(F, vec({1, 2, 3})), StructuralError);
}

TEST(Space, NormingFunctionalProperties) {
  Rng rng = make_rng(42);
  std::uniform_real_distribution<double> pd(1.05, 6.0);
  for (int trial = 0; trial < 300; ++trial) {
    const LpSpace s = LpSpace::make(pd(rng), 7);
    const Vector f = gaussian_vector(rng, 7);
    const Vector g = gaussian_vector(rng, 7);
    const auto F = norming_functional(s, f);
    EXPECT_NEAR(F.norm_bound, 1.0, 1e-10);
    EXPECT_NEAR(apply_functional(F, f), norm(s, f), 1e-10 * norm(s, f));
    EXPECT_LE(std::fabs(apply_functional(F, g)), norm(s, g) * (1 + 1e-10) + 1e-10);
    const auto Fc = norming_functional(s, 3.7 * f);
    EXPECT_LE((Fc.coords - F.coords).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Space, SmoothnessBound) {
  const LpSpace h = LpSpace::make(2, 2);
  EXPECT_DOUBLE_EQ(smoothness_bound(h, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(smoothness_bound(h, 0.0), 0.0);
  EXPECT_NEAR(smoothness_bound(LpSpace::make(1.5, 2), 2.0), 1.885618083164127, 1e-14);
}

TEST(Space, EmpiricalModulusHilbert) {
  const LpSpace h = LpSpace::make(2, 10);
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const double v = empirical_modulus(h, 1.0, 200, seed);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, std::sqrt(2.0) - 1.0 + 1e-12);
  }
}

TEST(Space, EmpiricalModulusSublinear) {
  const LpSpace s = LpSpace::make(3, 6);
  ModulusSampler rho(s, 128, 4);
  const double r1 = rho(0.1) / 0.1, r2 = rho(0.01) / 0.01, r3 = rho(0.001) / 0.001;
  EXPECT_GT(r1, r2);
  EXPECT_GT(r2, r3);
  EXPECT_LT(r3, 1e-2);
}

TEST(Space, EmpiricalModulusBelowPowerBound) {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const LpSpace s = LpSpace::make(p, 8);
    ModulusSampler rho(s, 256, 17);
    for (int k = 1; k <= 200; ++k) {
      const double u = 0.01 * k;
      EXPECT_LE(rho(u), smoothness_bound(s, u) + 1e-9) << "p=" << p << " u=" << u;
    }
  }
  const LpSpace s4 = LpSpace::make(4, 8);
  for (double u : {0.1, 0.5, 1.0, 2.0}) EXPECT_LE(empirical_modulus(s4, u, 128, 3), 1.5 * u * u);
}

TEST(Space, EmpiricalModulusDeterministic) {
  const LpSpace s = LpSpace::make(3, 5);
  EXPECT_EQ(empirical_modulus(s, 0.7, 64, 9), empirical_modulus(s, 0.7, 64, 9));
}

TEST(Space, XiRootClosedForm) {
  const LpSpace h = LpSpace::make(2, 2);
  EXPECT_NEAR(xi_root(h, RhoMode::power_bound, 1.0, 0.25), 0.5, 1e-12);
  Rng rng = make_rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double q = 1.05 + 0.95 * unit(rng);
    const double gamma = 0.5 + 2.0 * unit(rng);
    const double t = 0.01 + 0.99 * unit(rng);
    const double theta = 0.01 + 0.49 * unit(rng);
    const double closed = std::pow(theta * t / gamma, 1.0 / (q - 1.0));
    const double root = xi_root_power(q, gamma, t, theta);
    if (closed <= 2.0) {
      EXPECT_NEAR(root, closed, 1e-10);
    }
    EXPECT_LE(std::fabs(gamma * std::pow(root, q) - theta * t * root),
              1e-10 * std::max(1.0, theta * t));
  }
}

TEST(Space, XiRootMonotoneToZero) {
  const LpSpace s = LpSpace::make(1.5, 2);
  double prev = 3.0;
  for (double t : {1.0, 0.1, 0.01, 0.001}) {
    const double x = xi_root(s, RhoMode::power_bound, t, 0.5);
    EXPECT_LT(x, prev);
    prev = x;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Space, XiRootEmpiricalMatchesGridScan) {
  const LpSpace s = LpSpace::make(3, 4);
  const EmpiricalOptions opts{64, 3};
  const double root = xi_root(s, RhoMode::empirical, 0.6, 0.3, opts);
  ModulusSampler rho(s, opts.n_samples, opts.seed);
  double coarse = 2.0;
  for (int k = 1; k <= 2000; ++k) {
    if (rho(1e-3 * k) / (1e-3 * k) >= 0.18) {
      coarse = 1e-3 * k;
      break;
    }
  }
  double scan = coarse;
  for (int k = 0; k <= 10000; ++k) {
    const double u = coarse - 1e-3 + 1e-7 * k;
    if (u > 0 && rho(u) / u >= 0.18) {
      scan = u;
      break;
    }
  }
  EXPECT_NEAR(root, scan, 1e-6);
  EXPECT_LE(std::fabs(rho(root) - 0.18 * root), 1e-10);
}

TEST(Space, XiRootArgumentChecks) {
  const LpSpace s = LpSpace::make(2, 2);
  EXPECT_THROW(xi_root(s, RhoMode::power_bound, 0.0, 0.25), std::domain_error);
  EXPECT_THROW(xi_root(s, RhoMode::power_bound, 1.0, 0.6), std::domain_error);
}

#include <cmath>

#include <gtest/gtest.h>

#include "wbga/algorithms.hpp"
#include "wbga/perturbation.hpp"

using namespace wbga;

TEST(Schedule, ParsesAllKinds) {
  const SequenceSpec c = parse_sequence_spec("const:0.3", "delta", false);
  EXPECT_DOUBLE_EQ(c.at(1), 0.3);
  EXPECT_DOUBLE_EQ(c.at(50), 0.3);
  const SequenceSpec p = parse_sequence_spec("pow:0.1,1.1", "delta", false);
  EXPECT_DOUBLE_EQ(p.at(0), 0.1);
  EXPECT_DOUBLE_EQ(p.at(1), 0.1);
  EXPECT_NEAR(p.at(10), 0.1 * std::pow(10.0, -1.1), 1e-16);
  const SequenceSpec l = parse_sequence_spec("list:0.5,0.25", "delta", false);
  EXPECT_DOUBLE_EQ(l.at(1), 0.5);
  EXPECT_DOUBLE_EQ(l.at(2), 0.25);
  EXPECT_DOUBLE_EQ(l.at(9), 0.25);
  EXPECT_TRUE(parse_sequence_spec("prop72auto", "delta", true).is_auto());
  EXPECT_THROW(parse_sequence_spec("prop72auto", "weakness", false), StructuralError);
  EXPECT_THROW(parse_sequence_spec("const:1.5", "delta", false), StructuralError);
  EXPECT_THROW(parse_weakness_spec("const:0"), StructuralError);
}

TEST(Schedule, ErrorSpecRoundTrip) {
  const ErrorSchedule e = parse_error_spec("err:delta=pow:0.1,1.1,eta=const:0.01,eps=derived");
  EXPECT_TRUE(e.eps_derived);
  EXPECT_DOUBLE_EQ(e.eta.at(3), 0.01);
  const ErrorSchedule back = parse_error_spec(e.spec());
  EXPECT_EQ(back.spec(), e.spec());
  const ErrorSchedule l = parse_error_spec("err:delta=const:0,eta=const:0,eps=list:0.1,0.2");
  EXPECT_FALSE(l.eps_derived);
  ASSERT_EQ(l.eps_list.size(), 2u);
  EXPECT_DOUBLE_EQ(l.eps_list[1], 0.2);
}

TEST(Perturbation, ZeroDeltaGivesNormingFunctional) {
  const LpSpace s = LpSpace::make(3, 5);
  Rng rng = make_rng(1);
  const Vector f = gaussian_vector(rng, 5);
  const PerturbedFunctional pf = perturbed_functional(s, f, 0.0, 7);
  EXPECT_TRUE(pf.functional.coords.isApprox(norming_functional(s, f).coords));
  EXPECT_EQ(pf.achieved_delta, 0.0);
}

TEST(Perturbation, PerturbedFunctionalsAreAdmissible) {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const LpSpace s = LpSpace::make(p, 8);
    Rng rng = make_rng(11);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const Vector f = gaussian_vector(rng, 8);
      const PerturbedFunctional pf = perturbed_functional(s, f, 0.1, seed);
      EXPECT_LE(dual_norm(s, pf.functional.coords), 1.0 + 1e-12);
      const double measured = 1.0 - pf.functional.coords.dot(f) / norm(s, f);
      EXPECT_LE(measured, 0.1 + 1e-12);
      EXPECT_NEAR(measured, pf.achieved_delta, 1e-12);
    }
  }
}

TEST(Perturbation, PerturbationIsActuallyUsed) {
  const LpSpace s = LpSpace::make(3, 8);
  Rng rng = make_rng(3);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const PerturbedFunctional pf = perturbed_functional(s, gaussian_vector(rng, 8), 0.1, seed);
    worst = std::max(worst, pf.achieved_delta);
  }
  EXPECT_GT(worst, 0.05);
}

TEST(Perturbation, FullDeltaStillReturnsUnitFunctional) {
  const LpSpace s = LpSpace::make(1.5, 4);
  const Vector f = Vector::Constant(4, 0.25);
  const PerturbedFunctional pf = perturbed_functional(s, f, 1.0, 2);
  EXPECT_LE(dual_norm(s, pf.functional.coords), 1.0 + 1e-12);
  EXPECT_LE(pf.achieved_delta, 1.0 + 1e-12);
}

TEST(Perturbation, RelaxedMinimizeZeroEtaIsExact) {
  auto obj = [](const Vector& x) { return 1.0 + (x[0] - 2.0) * (x[0] - 2.0); };
  const VecMin r =
      relaxed_minimize(obj, 0.0, [] { return VecMin{Vector::Constant(1, 2.0), 1.0}; }, 5);
  EXPECT_EQ(r.arg[0], 2.0);
  EXPECT_EQ(r.value, 1.0);
}

TEST(Perturbation, RelaxedMinimizeRespectsBudget) {
  auto obj = [](const Vector& x) {
    return 1.0 + (x[0] - 1.0) * (x[0] - 1.0) + 3.0 * (x[1] + 0.5) * (x[1] + 0.5);
  };
  Vector arg(2);
  arg << 1.0, -0.5;
  int moved = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const VecMin r = relaxed_minimize(obj, 0.05, [&] { return VecMin{arg, 1.0}; }, seed);
    EXPECT_GE(r.value, 1.0);
    EXPECT_LE(r.value, 1.05);
    EXPECT_NEAR(r.value, obj(r.arg), 1e-15);
    if (r.value > 1.0 + 1e-6) ++moved;
  }
  EXPECT_GT(moved, 900);
}

TEST(Perturbation, RelaxedMinimizeZeroOptimumKeepsExactArgument) {
  auto obj = [](const Vector& x) { return std::fabs(x[0] - 0.3); };
  const VecMin r =
      relaxed_minimize(obj, 0.5, [] { return VecMin{Vector::Constant(1, 0.3), 0.0}; }, 1);
  EXPECT_EQ(r.arg[0], 0.3);
  EXPECT_EQ(r.value, 0.0);
}

TEST(Perturbation, RelaxedMinimizeHonoursLowerBounds) {
  auto obj = [](const Vector& x) { return 1.0 + x.squaredNorm(); };
  const Vector lower = Vector::Constant(2, 0.0);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const VecMin r =
        relaxed_minimize(obj, 0.2, [] { return VecMin{Vector::Zero(2), 1.0}; }, seed, lower);
    EXPECT_GE(r.arg.minCoeff(), 0.0);
    EXPECT_LE(r.value, 1.2);
  }
}

TEST(Perturbation, EpsBoundClosedForm) {
  const LpSpace h = LpSpace::make(2, 2);
  EXPECT_EQ(eps_bound_prop61(h, 0.0, 0.0, 1.0), 0.0);
  EXPECT_NEAR(eps_bound_prop61(h, 0.004, 0.006, 1.0), 0.2, 1e-15);
}

TEST(Perturbation, EpsBoundMatchesNumericInfimum) {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const LpSpace s = LpSpace::make(p, 2);
    for (double d : {1e-4, 0.01, 0.3}) {
      for (double g : {0.5, 1.0, 2.0}) {
        // inf over lambda > 0 of (d + 2 gamma (lambda g)^q) / lambda, by log-grid scan
        double best = INFINITY;
        for (int k = 0; k <= 200000; ++k) {
          const double lam = std::pow(10.0, -8.0 + 12.0 * k / 200000.0);
          best = std::min(best, (d + 2.0 * s.gamma * std::pow(lam * g, s.q)) / lam);
        }
        EXPECT_NEAR(eps_bound_prop61(s, d / 2, d / 2, g), best, 1e-6 * best)
            << "p " << p << " d " << d << " g " << g;
        const double lam = eps_bound_argmin(s, d / 2, d / 2, g);
        EXPECT_NEAR((d + 2.0 * s.gamma * std::pow(lam * g, s.q)) / lam, best, 1e-6 * best);
      }
    }
  }
}

TEST(Perturbation, Prop72Threshold) {
  const LpSpace h = LpSpace::make(2, 2);
  EXPECT_NEAR(prop72_threshold(h, 1.0, 1.0), std::pow(64.0, -2.0) * std::pow(0.5, -1.0), 1e-18);
  const LpSpace s = LpSpace::make(1.5, 2);
  EXPECT_NEAR(prop72_threshold(s, 0.5, 0.8),
              std::pow(64.0, -3.0) * std::pow(1.0 / 1.5, -2.0) * std::pow(0.4, 3.0), 1e-20);
}

TEST(Perturbation, ZeroSchedulesReproduceExactRuns) {
  for (double p : {1.5, 3.0}) {
    const LpSpace s = LpSpace::make(p, 16);
    const Dictionary D = build_dictionary(s, "random_gauss", 48, 4);
    const Target t = make_target(D, parse_target_spec("a1,k=8,seed=5"));
    const ErrorSchedule zero = parse_error_spec("err:delta=const:0,eta=const:0,eps=derived");
    for (Algorithm a : {Algorithm::awcga, Algorithm::awgafr, Algorithm::arwrga}) {
      const RunReport ex = run_greedy(exact_counterpart(a), t.f, D, {}, {}, 30, 1e-12);
      const RunReport ap = run_awbga(a, t.f, D, {}, zero, {}, 30, 1e-12);
      ASSERT_EQ(ex.records.size(), ap.records.size()) << to_string(a);
      for (std::size_t i = 0; i < ex.records.size(); ++i) {
        EXPECT_EQ(ex.records[i].selected_index, ap.records[i].selected_index);
        EXPECT_NEAR(ex.records[i].residual_norm, ap.records[i].residual_norm, 1e-10);
        EXPECT_EQ(ap.records[i].eps_m, 0.0);
      }
    }
  }
}

TEST(Perturbation, BiorthogonalitySlackWithinDerivedBound) {
  const LpSpace s = LpSpace::make(3, 32);
  const Dictionary D = build_dictionary(s, "random_gauss", 96, 1);
  const Target t = make_target(D, parse_target_spec("a1,k=16,seed=1"));
  const ErrorSchedule e = parse_error_spec("err:delta=pow:0.1,1.1,eta=pow:0.1,1.1,eps=derived");
  for (Algorithm a : {Algorithm::awcga, Algorithm::awgafr, Algorithm::arwrga}) {
    RunOptions o;
    o.seed = 3;
    const RunReport r = run_awbga(a, t.f, D, {}, e, {}, 60, 1e-12, o);
    for (const auto& rec : r.records) {
      if (rec.exact) continue;
      EXPECT_LE(rec.bo_abs, rec.eps_m + 1e-12) << to_string(a) << " m " << rec.m;
      EXPECT_LE(rec.achieved_delta, rec.delta_m + 1e-12);
      EXPECT_LE(rec.residual_norm, (1.0 + rec.eta_m) * rec.er_reference + 1e-9);
    }
  }
}

TEST(Perturbation, SchedulesDecayToSmallResidual) {
  const LpSpace s = LpSpace::make(2, 32);
  const Dictionary D = build_dictionary(s, "random_gauss", 96, 2);
  const Target t = make_target(D, parse_target_spec("a1,k=16,seed=2"));
  const ErrorSchedule e = parse_error_spec("err:delta=pow:0.1,1.1,eta=pow:0.1,1.1,eps=derived");
  for (Algorithm a : {Algorithm::awcga, Algorithm::awgafr, Algorithm::arwrga}) {
    const RunReport r = run_awbga(a, t.f, D, {}, e, {}, 500, 1e-3);
    ASSERT_FALSE(r.records.empty());
    EXPECT_LE(r.records.back().residual_norm, 1e-3) << to_string(a);
  }
}

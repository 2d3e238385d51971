#include <cmath>

#include <gtest/gtest.h>

#include "wbga/dictionary.hpp"

using namespace wbga;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Rank by Gaussian elimination with partial pivoting.
int elimination_rank(Matrix A) {
  int rank = 0;
  const Eigen::Index rows = A.rows(), cols = A.cols();
  for (Eigen::Index c = 0; c < cols && rank < rows; ++c) {
    Eigen::Index piv = rank;
    for (Eigen::Index r = rank; r < rows; ++r)
      if (std::fabs(A(r, c)) > std::fabs(A(piv, c))) piv = r;
    if (std::fabs(A(piv, c)) < 1e-10) continue;
    A.row(piv).swap(A.row(rank));
    for (Eigen::Index r = rank + 1; r < rows; ++r) A.row(r) -= A(r, c) / A(rank, c) * A.row(rank);
    ++rank;
  }
  return rank;
}

}  // namespace

TEST(Dictionary, CanonicalHasUnitAxes) {
  const LpSpace s = LpSpace::make(2, 3);
  const Dictionary D = build_dictionary(s, "canonical", 3, 0);
  ASSERT_EQ(D.size(), 3);
  EXPECT_TRUE(D.atoms.isApprox(Matrix::Identity(3, 3)));
  for (int i = 1; i <= 3; ++i) EXPECT_DOUBLE_EQ(norm(s, D.element(i)), 1.0);
  EXPECT_TRUE(D.element(-2).isApprox(-D.element(2)));
  EXPECT_THROW(D.element(0), StructuralError);
  EXPECT_THROW(D.element(4), StructuralError);
}

TEST(Dictionary, RandomGaussIsNormalizedAndSpanning) {
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const LpSpace s = LpSpace::make(p, 64);
    const Dictionary D = build_dictionary(s, "random_gauss", 256, 7);
    ASSERT_EQ(D.size(), 256);
    for (int i = 1; i <= 256; ++i) EXPECT_NEAR(norm(s, D.element(i)), 1.0, 1e-14);
    EXPECT_EQ(elimination_rank(D.atoms), 64);
    EXPECT_EQ(dictionary_rank(D.atoms), 64);
  }
}

TEST(Dictionary, SameSeedSameAtoms) {
  const LpSpace s = LpSpace::make(3, 8);
  EXPECT_EQ(build_dictionary(s, "random_gauss", 20, 5).atoms,
            build_dictionary(s, "random_gauss", 20, 5).atoms);
  EXPECT_NE(build_dictionary(s, "random_gauss", 20, 5).atoms,
            build_dictionary(s, "random_gauss", 20, 6).atoms);
}

TEST(Dictionary, RejectsBadSpecs) {
  const LpSpace s = LpSpace::make(2, 4);
  EXPECT_THROW(parse_dictionary_spec(s, "dict:nonsense,N=4"), StructuralError);
  EXPECT_THROW(parse_dictionary_spec(s, "dict:random_gauss,N=0"), StructuralError);
}

TEST(Dictionary, DualNormOfCanonical) {
  const LpSpace s = LpSpace::make(2, 2);
  const Dictionary D = build_dictionary(s, "canonical", 2, 0);
  EXPECT_DOUBLE_EQ(dict_dual_norm(make_functional(s, vec({0.6, 0.8})), D), 0.8);
  EXPECT_DOUBLE_EQ(dict_dual_norm(make_functional(s, vec({0.6, -0.8})), D), 0.8);
}

TEST(Dictionary, PeakAttainedWhenNormedDirectionIsAnAtom) {
  const LpSpace s = LpSpace::make(3, 4);
  Dictionary D = build_dictionary(s, "random_gauss", 10, 1);
  const Vector f = vec({0.3, -1.0, 0.2, 0.5});
  D.atoms.col(4) = f / norm(s, f);
  EXPECT_NEAR(dict_dual_norm(norming_functional(s, f), D), 1.0, 1e-14);
}

TEST(Dictionary, DualNormMatchesExhaustiveScan) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LpSpace s = LpSpace::make(1.5, 6);
    const Dictionary D = build_dictionary(s, "random_gauss", 50, seed);
    Rng rng = make_rng(seed + 100);
    const auto F = make_functional(s, gaussian_vector(rng, 6));
    double best = -INFINITY;
    for (int i = 1; i <= 50; ++i)
      for (int sg : {1, -1}) best = std::max(best, F.coords.dot(D.element(sg * i)));
    EXPECT_DOUBLE_EQ(dict_dual_norm(F, D), best);
  }
}

TEST(Dictionary, ExactArgmaxPicksSignedMaximizer) {
  const LpSpace s = LpSpace::make(2, 2);
  const Dictionary D = build_dictionary(s, "canonical", 2, 0);
  const Selection a = greedy_select(make_functional(s, vec({0.6, 0.8})), D, 1.0,
                                    SelectionRule::exact_argmax);
  EXPECT_EQ(a.index, 2);
  EXPECT_DOUBLE_EQ(a.value, 0.8);
  const Selection b = greedy_select(make_functional(s, vec({0.6, -0.8})), D, 1.0,
                                    SelectionRule::exact_argmax);
  EXPECT_EQ(b.index, -2);
  EXPECT_DOUBLE_EQ(b.value, 0.8);
}

TEST(Dictionary, ExactArgmaxBreaksTiesBySmallestIndex) {
  const LpSpace s = LpSpace::make(2, 2);
  const Dictionary D = build_dictionary(s, "canonical", 2, 0);
  const auto F = make_functional(s, vec({std::sqrt(0.5), std::sqrt(0.5)}));
  EXPECT_EQ(greedy_select(F, D, 1.0, SelectionRule::exact_argmax).index, 1);
  const auto G = make_functional(s, vec({-std::sqrt(0.5), std::sqrt(0.5)}));
  EXPECT_EQ(greedy_select(G, D, 1.0, SelectionRule::exact_argmax).index, -1);
}

TEST(Dictionary, ThresholdFirstClearsWeakThreshold) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LpSpace s = LpSpace::make(4, 8);
    const Dictionary D = build_dictionary(s, "random_gauss", 60, seed);
    Rng rng = make_rng(seed + 7);
    const auto F = make_functional(s, gaussian_vector(rng, 8));
    double scan = 0.0;
    for (int i = 1; i <= 60; ++i) scan = std::max(scan, std::fabs(F.coords.dot(D.element(i))));
    const Selection sel = greedy_select(F, D, 0.5, SelectionRule::threshold_first);
    EXPECT_GE(F.coords.dot(D.element(sel.index)), 0.5 * scan - 1e-15);
    // Nothing earlier in the scan order clears the threshold.
    for (int i = 1; i < std::abs(sel.index); ++i)
      EXPECT_LT(std::fabs(F.coords.dot(D.element(i))), 0.5 * scan);
  }
}

TEST(Dictionary, WeaknessOutsideUnitIntervalIsADomainError) {
  const LpSpace s = LpSpace::make(2, 2);
  const Dictionary D = build_dictionary(s, "canonical", 2, 0);
  const auto F = make_functional(s, vec({1, 0}));
  EXPECT_THROW(greedy_select(F, D, 1.5, SelectionRule::threshold_first), std::domain_error);
  EXPECT_THROW(greedy_select(F, D, -0.1, SelectionRule::threshold_first), std::domain_error);
}

TEST(Dictionary, CertificateCombination) {
  const LpSpace s = LpSpace::make(2, 2);
  const Dictionary D = build_dictionary(s, "canonical", 2, 0);
  const Vector f = combine(D, Certificate{{1, 2}, {0.6, 0.4}});
  EXPECT_TRUE(f.isApprox(vec({0.6, 0.4})));
  EXPECT_NEAR(norm(s, f), std::sqrt(0.52), 1e-15);
}

TEST(Dictionary, SampledTargetsLieInTheHull) {
  const LpSpace s = LpSpace::make(3, 16);
  const Dictionary D = build_dictionary(s, "random_gauss", 40, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (int k : {1, 4, 16}) {
      const Target t = make_target(D, parse_target_spec("a1,k=" + std::to_string(k) +
                                                        ",seed=" + std::to_string(seed)));
      ASSERT_TRUE(t.has_certificate);
      EXPECT_EQ(static_cast<int>(t.certificate.indices.size()), k);
      double total = 0.0;
      for (double w : t.certificate.weights) {
        EXPECT_GE(w, 0.0);
        total += w;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
      EXPECT_TRUE(t.f.isApprox(combine(D, t.certificate)));
      EXPECT_LE(norm(s, t.f), 1.0 + 1e-12);
      if (k == 1) {
        EXPECT_NEAR(norm(s, t.f), 1.0, 1e-12);
      }
    }
  }
}

TEST(Dictionary, PerturbTargetStaysWithinEps) {
  const LpSpace s = LpSpace::make(1.5, 10);
  const Vector f = Vector::Constant(10, 0.05);
  EXPECT_EQ(perturb_target(s, f, 0.0, 3), f);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const double d = norm(s, perturb_target(s, f, 0.1, seed) - f);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 0.1 + 1e-15);
  }
}

TEST(Dictionary, NoisyTargetRecordsItsCertificate) {
  const LpSpace s = LpSpace::make(2, 16);
  const Dictionary D = build_dictionary(s, "random_gauss", 32, 1);
  const Target t = make_target(D, parse_target_spec("noisy,k=4,eps=0.05,seed=9"));
  EXPECT_TRUE(t.has_certificate);
  EXPECT_DOUBLE_EQ(t.eps, 0.05);
  EXPECT_DOUBLE_EQ(t.a_eps, 1.0);
  EXPECT_NEAR(t.noise_norm, norm(s, t.f - t.f_eps), 1e-15);
  EXPECT_LE(t.noise_norm, 0.05 + 1e-15);
}

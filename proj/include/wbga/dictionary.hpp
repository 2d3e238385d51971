#ifndef WBGA_DICTIONARY_HPP
#define WBGA_DICTIONARY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "config.hpp"
#include "space.hpp"
#include "spec_string.hpp"

namespace wbga {

/// Finite dictionary stored as the columns of `atoms`. The dictionary is
/// symmetric: -g_i is a member whenever g_i is, and is addressed by the
/// signed, 1-based index -(i+1).
struct Dictionary {
  LpSpace space;
  Matrix atoms;  // n x N
  std::string kind;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return atoms.cols(); }

  /// Element for a signed 1-based index.
  Vector element(int signed_index) const {
    const int i = std::abs(signed_index) - 1;
    if (signed_index == 0 || i >= size()) throw StructuralError("dictionary index out of range");
    return signed_index > 0 ? Vector(atoms.col(i)) : Vector(-atoms.col(i));
  }

  std::string spec() const {
    std::ostringstream os;
    os << "dict:" << kind << ",N=" << size() << ",seed=" << seed;
    return os.str();
  }
};

inline int dictionary_rank(const Matrix& atoms) {
  Eigen::ColPivHouseholderQR<Matrix> qr(atoms);
  qr.setThreshold(1e-10);
  return static_cast<int>(qr.rank());
}

namespace detail {

inline void normalize_columns(const LpSpace& space, Matrix& atoms) {
  for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
    Vector col = atoms.col(j);
    const double nc = lr_norm(col, space.p);
    if (nc == 0.0) throw std::runtime_error("zero dictionary element");
    atoms.col(j) = col / nc;
  }
}

}  // namespace detail

/// Builds a unit-norm dictionary. Kinds:
///  - "canonical": e_1..e_n (size must equal n)
///  - "random_gauss": i.i.d. Gaussian directions
///  - "trig_grid": oversampled cosine frame on a frequency grid
///  - "coherent": a slow random walk on the sphere, so neighbours are highly
///    correlated (Euclidean cosine 1/sqrt(1.16) ~ 0.93 before l_p scaling)
inline Dictionary build_dictionary(const LpSpace& space, const std::string& kind, int size,
                                   std::uint64_t seed) {
  const int n = space.n;
  if (size < n) throw StructuralError("dictionary does not span: size " + std::to_string(size) +
                                      " < n=" + std::to_string(n));
  Dictionary D;
  D.space = space;
  D.kind = kind;
  D.seed = seed;
  if (kind == "canonical") {
    if (size != n) throw StructuralError("canonical dictionary has exactly n elements");
    D.atoms = Matrix::Identity(n, n);
    return D;
  }
  if (kind == "random_gauss") {
    Rng rng = make_rng(seed, 0x646963);
    D.atoms.resize(n, size);
    for (int j = 0; j < size; ++j) D.atoms.col(j) = gaussian_vector(rng, n);
  } else if (kind == "trig_grid") {
    D.atoms.resize(n, size);
    const double pi = std::acos(-1.0);
    for (int j = 0; j < size; ++j) {
      const double freq = static_cast<double>(j) * n / size;
      for (int i = 0; i < n; ++i) D.atoms(i, j) = std::cos(pi * (i + 0.5) * freq / n);
    }
  } else if (kind == "coherent") {
    Rng rng = make_rng(seed, 0x636f68);
    D.atoms.resize(n, size);
    Vector g = gaussian_vector(rng, n).normalized();
    D.atoms.col(0) = g;
    for (int j = 1; j < size; ++j) {
      Vector z = gaussian_vector(rng, n);
      z -= z.dot(g) * g;
      if (z.norm() > 0.0) z.normalize();
      g = (g + 0.4 * z).normalized();
      D.atoms.col(j) = g;
    }
  } else {
    throw StructuralError("unknown dictionary kind '" + kind + "'");
  }
  detail::normalize_columns(space, D.atoms);
  if (dictionary_rank(D.atoms) < n) throw StructuralError("dictionary does not span");
  return D;
}

inline Dictionary parse_dictionary_spec(const LpSpace& space, const std::string& text) {
  SpecString s = parse_spec_string(text, "dict", true);
  if (s.head.empty()) throw StructuralError("dictionary spec needs a kind, e.g. dict:random_gauss");
  const auto size = s.integer_or("N", s.head == "canonical" ? space.n : -1);
  if (size <= 0) throw StructuralError("field 'N': dictionary size required");
  const auto seed = s.integer_or("seed", 0);
  return build_dictionary(space, s.head, static_cast<int>(size), static_cast<std::uint64_t>(seed));
}

/// F(g_i) for every stored atom.
inline Vector dictionary_values(const DualFunctional& F, const Dictionary& D) {
  if (F.coords.size() != D.atoms.rows()) throw StructuralError("dimension mismatch");
  return D.atoms.transpose() * F.coords;
}

/// ||F||_D = sup over the symmetrized dictionary = max_i |F(g_i)|.
inline double dict_dual_norm(const DualFunctional& F, const Dictionary& D) {
  if (D.size() == 0) throw std::invalid_argument("empty dictionary");
  return dictionary_values(F, D).cwiseAbs().maxCoeff();
}

enum class SelectionRule { exact_argmax, threshold_first };

inline const char* to_string(SelectionRule r) {
  return r == SelectionRule::exact_argmax ? "exact_argmax" : "threshold_first";
}

inline SelectionRule parse_selection_rule(const std::string& s) {
  if (s == "exact_argmax") return SelectionRule::exact_argmax;
  if (s == "threshold_first") return SelectionRule::threshold_first;
  throw StructuralError("unknown selection rule '" + s + "'");
}

struct Selection {
  int index = 0;          // signed, 1-based
  double value = 0.0;     // F(phi)
  double dict_norm = 0.0; // ||F||_D
};

/// Weak greedy selection: returns phi with F(phi) >= t ||F||_D.
///
/// exact_argmax takes the maximiser with the smallest index, +g preferred on
/// ties. threshold_first scans g_1, -g_1, g_2, -g_2, ... and stops at the first
/// element that clears the threshold.
inline Selection greedy_select(const DualFunctional& F, const Dictionary& D, double t,
                               SelectionRule rule) {
  if (D.size() == 0) throw std::invalid_argument("empty dictionary");
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("weakness t must lie in [0, 1]");
  const Vector v = dictionary_values(F, D);
  Selection sel;
  sel.dict_norm = v.cwiseAbs().maxCoeff();
  const double threshold = rule == SelectionRule::exact_argmax ? sel.dict_norm : t * sel.dict_norm;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::fabs(v[i]);
    if (a >= threshold) {
      const int idx = static_cast<int>(i) + 1;
      sel.index = v[i] >= 0.0 ? idx : -idx;
      sel.value = a;
      return sel;
    }
  }
  // Unreachable: the maximiser always clears the threshold.
  throw std::logic_error("greedy_select found no admissible element");
}

// ---------------------------------------------------------------------------
// Targets

enum class TargetMode { a1_sparse, a1_dense, general_plus_noise };

struct TargetSpec {
  TargetMode mode = TargetMode::a1_sparse;
  int k = 1;
  double eps = 0.0;
  std::uint64_t seed = 0;
  double a_eps = 1.0;

  std::string spec() const {
    std::ostringstream os;
    os.precision(17);
    switch (mode) {
      case TargetMode::a1_sparse: os << "target:a1,k=" << k; break;
      case TargetMode::a1_dense: os << "target:a1dense"; break;
      case TargetMode::general_plus_noise: os << "target:noisy,k=" << k << ",eps=" << eps; break;
    }
    if (a_eps != 1.0) os << ",A=" << a_eps;
    os << ",seed=" << seed;
    return os.str();
  }
};

inline TargetSpec parse_target_spec(const std::string& text) {
  SpecString s = parse_spec_string(text, "target", true);
  TargetSpec t;
  if (s.head == "a1") {
    t.mode = TargetMode::a1_sparse;
  } else if (s.head == "a1dense") {
    t.mode = TargetMode::a1_dense;
  } else if (s.head == "noisy") {
    t.mode = TargetMode::general_plus_noise;
    t.eps = s.number("eps");
    if (!(t.eps >= 0.0)) throw StructuralError("field 'eps': must be nonnegative");
  } else {
    throw StructuralError("unknown target mode '" + s.head + "'");
  }
  t.k = static_cast<int>(s.integer_or("k", 1));
  if (t.k <= 0) throw StructuralError("field 'k': must be positive");
  t.seed = static_cast<std::uint64_t>(s.integer_or("seed", 0));
  t.a_eps = s.number_or("A", 1.0);
  if (!(t.a_eps > 0.0)) throw StructuralError("field 'A': must be positive");
  return t;
}

/// Convex-combination certificate: f_eps = A * sum w_i g_{idx_i}.
struct Certificate {
  std::vector<int> indices;  // signed, 1-based
  std::vector<double> weights;
};

struct Target {
  Vector f;
  Vector f_eps;
  bool has_certificate = false;
  Certificate certificate;
  double eps = 0.0;         // bound on ||f - f_eps||
  double a_eps = 1.0;       // f_eps / a_eps lies in A_1(D)
  double noise_norm = 0.0;  // measured ||f - f_eps||
};

inline Vector combine(const Dictionary& D, const Certificate& c) {
  Vector f = Vector::Zero(D.atoms.rows());
  for (std::size_t j = 0; j < c.indices.size(); ++j) f += c.weights[j] * D.element(c.indices[j]);
  return f;
}

/// Random point of A_1(D): k distinct atoms with random signs and
/// Dirichlet(1,...,1) weights.
inline std::pair<Vector, Certificate> sample_a1_target(const Dictionary& D, const TargetSpec& spec) {
  const int N = static_cast<int>(D.size());
  const int k = spec.mode == TargetMode::a1_dense ? N : spec.k;
  if (k > N) throw StructuralError("target sparsity k exceeds dictionary size");
  Rng rng = make_rng(spec.seed, 0x746172);
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 1);
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, N - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution coin(0.5);
  Certificate c;
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    const double w = expo(rng) + 1e-300;
    c.weights.push_back(w);
    c.indices.push_back(coin(rng) ? order[i] : -order[i]);
    total += w;
  }
  for (double& w : c.weights) w /= total;
  return {combine(D, c), std::move(c)};
}

/// f = f_eps + e with a random direction and ||e|| drawn uniformly in [0, eps].
inline Vector perturb_target(const LpSpace& space, const Vector& f_eps, double eps,
                             std::uint64_t seed) {
  require_dim(space, f_eps);
  if (!(eps >= 0.0)) throw std::domain_error("noise level must be nonnegative");
  if (eps == 0.0) return f_eps;
  Rng rng = make_rng(seed, 0x6e6f69);
  Vector dir = gaussian_vector(rng, space.n);
  dir /= lr_norm(dir, space.p);
  std::uniform_real_distribution<double> mag(0.0, eps);
  Vector e = mag(rng) * dir;
  const double ne = lr_norm(e, space.p);
  if (ne > eps) e *= eps / ne;
  return f_eps + e;
}

inline Target make_target(const Dictionary& D, const TargetSpec& spec) {
  Target t;
  auto [f1, cert] = sample_a1_target(D, spec);
  t.f_eps = spec.a_eps * f1;
  t.certificate = std::move(cert);
  t.has_certificate = true;
  t.a_eps = spec.a_eps;
  if (spec.mode == TargetMode::general_plus_noise) {
    t.eps = spec.eps;
    t.f = perturb_target(D.space, t.f_eps, spec.eps, spec.seed ^ 0x5bd1e995ULL);
  } else {
    t.f = t.f_eps;
  }
  t.noise_norm = norm(D.space, t.f - t.f_eps);
  return t;
}

}  // namespace wbga

#endif  // WBGA_DICTIONARY_HPP

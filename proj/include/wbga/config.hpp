#ifndef WBGA_CONFIG_HPP
#define WBGA_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace wbga {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Tolerances shared by every module. Algebraic identities are checked at
/// `algebraic`, optimizer outputs at `optimizer`.
struct Tolerances {
  double algebraic = 1e-10;
  double optimizer = 1e-6;
  double selection = 1e-12;
  double functional_norm = 1e-12;
};

inline constexpr Tolerances kTol{};

/// Thrown when two objects from different spaces meet, or when a spec string
/// cannot be parsed.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// |a|^e with fast paths for the exponents that show up for p in {1.5, 2, 3, 4}.
inline double abs_pow(double a, double e) {
  a = std::fabs(a);
  if (e == 1.0) return a;
  if (e == 2.0) return a * a;
  if (e == 3.0) return a * a * a;
  if (e == 4.0) {
    const double s = a * a;
    return s * s;
  }
  if (e == 0.5) return std::sqrt(a);
  if (e == 1.5) return a * std::sqrt(a);
  if (a == 0.0) return 0.0;
  return std::pow(a, e);
}

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// Seeds are mixed so that neighbouring integers give unrelated streams.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

inline Vector gaussian_vector(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace wbga

#endif  // WBGA_CONFIG_HPP

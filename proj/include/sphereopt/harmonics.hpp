#pragma once

// Spherical-harmonic analysis on S^{n-1}: surface areas, Gegenbauer polynomials,
// Funk-Hecke coefficients, exact monomial moments and harmonic decomposition.
//
// Integrals over the sphere are always taken against the rotation-invariant
// probability measure (total mass 1).

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "multi_index.hpp"
#include "polynomial.hpp"

namespace sphereopt {

/// omega_n = 2 pi^{n/2} / Gamma(n/2), the surface area of S^{n-1}.
inline double surface_area(int n) {
  if (n < 2) throw std::invalid_argument("surface_area: n must be >= 2");
  return 2.0 * std::exp(0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n));
}

/// Also defined for n = 1, where S^0 = {-1, 1} has counting measure 2.
inline double log_surface_area(int n) {
  if (n < 1) throw std::invalid_argument("log_surface_area: n must be >= 1");
  return std::log(2.0) + 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n);
}

/// Number of linearly independent spherical harmonics of degree j on S^{n-1}.
inline std::uint64_t harmonic_count(int j, int n) {
  if (n < 2) throw std::invalid_argument("harmonic_count: n must be >= 2");
  if (j < 0) throw std::invalid_argument("harmonic_count: negative degree");
  std::uint64_t all = checked_binomial(static_cast<std::uint64_t>(n + j - 1), static_cast<std::uint64_t>(j));
  std::uint64_t lower = j >= 2 ? checked_binomial(static_cast<std::uint64_t>(n + j - 3), static_cast<std::uint64_t>(j - 2)) : 0;
  return all - lower;
}

/// Gegenbauer polynomial P_j(t) for dimension n, normalized so that P_j(1) = 1.
/// Three-term recurrence (j + n - 2) P_{j+1} = (2j + n - 2) t P_j - j P_{j-1}.
inline double gegenbauer_eval(int j, int n, double t) {
  if (n < 3) throw std::invalid_argument("gegenbauer_eval: n must be >= 3");
  if (j < 0) throw std::invalid_argument("gegenbauer_eval: negative degree");
  if (std::abs(t) > 1.0 + 1e-12) throw std::domain_error("gegenbauer_eval: |t| > 1");
  double prev = 1.0;
  if (j == 0) return prev;
  double cur = t;
  for (int k = 1; k < j; ++k) {
    double next = ((2.0 * k + n - 2) * t * cur - k * prev) / (k + n - 2.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// log lambda(n, l, j) for even j <= 2l (caller guarantees it is nonzero).
inline double log_lambda_coeff(int n, int l, int j) {
  return 0.5 * std::log(std::numbers::pi) - 2.0 * l * std::log(2.0) + std::lgamma(0.5 * (n - 1)) +
         std::lgamma(2.0 * l + 1) - std::lgamma(l + 1 - 0.5 * j) - std::lgamma(l + 0.5 * (n + j));
}

/// Funk-Hecke coefficient lambda(n,l,j) = int_{-1}^{1} t^{2l} P_j(t) (1-t^2)^{(n-3)/2} dt,
/// in closed form. Exactly zero for odd j or j > 2l.
inline double lambda_coeff(int n, int l, int j) {
  if (n < 3) throw std::invalid_argument("lambda_coeff: n must be >= 3");
  if (l < 0 || j < 0) throw std::invalid_argument("lambda_coeff: negative argument");
  if (j % 2 != 0 || j > 2 * l) return 0.0;
  return std::exp(log_lambda_coeff(n, l, j));
}

/// lambda(n,l,j) / lambda(n,l,0) = Gamma(l+1) Gamma(l+n/2) / (Gamma(l+1-j/2) Gamma(l+(n+j)/2)).
inline double lambda_ratio(int n, int l, int j) {
  if (j % 2 != 0) throw std::invalid_argument("lambda_ratio: j must be even");
  if (j < 0 || j > 2 * l) throw std::invalid_argument("lambda_ratio: need 0 <= j <= 2l");
  return std::exp(std::lgamma(l + 1.0) + std::lgamma(l + 0.5 * n) - std::lgamma(l + 1 - 0.5 * j) -
                  std::lgamma(l + 0.5 * (n + j)));
}

struct RatioGapBounds {
  double gap;          ///< upper bound on 1 - lambda_ratio
  double inverse_gap;  ///< upper bound on 1/lambda_ratio - 1, meaningful only when <= 1
};

inline RatioGapBounds ratio_gap_bounds(int n, int l, int j) {
  if (j % 2 != 0 || j < 2 || j > 2 * l) throw std::invalid_argument("ratio_gap_bounds: need even 2 <= j <= 2l");
  double g = j * (0.5 * (j + n) - 1.0) / (2.0 * l + n);
  return {g, 2.0 * g};
}

struct DeFinettiEps {
  double value;
  bool valid;  ///< l satisfies l >= 2a^2(a + n/2 - 1) - n/2 (and a < l)
};

/// Relative error eps(a,l,n) = 4a^2(a + n/2 - 1)/(2l + n) of the level-l relaxation.
inline DeFinettiEps definetti_eps(int a, int l, int n) {
  double value = 4.0 * a * a * (a + 0.5 * n - 1.0) / (2.0 * l + n);
  double threshold = 2.0 * a * a * (a + 0.5 * n - 1.0) - 0.5 * n;
  return {value, l >= threshold && a < l};
}

/// Smallest level meeting the hypothesis of the convergence guarantee.
inline int definetti_min_level(int a, int n) {
  double threshold = 2.0 * a * a * (a + 0.5 * n - 1.0) - 0.5 * n;
  int l = static_cast<int>(std::ceil(threshold - 1e-12));
  return std::max(l, a + 1);
}

/// Exact integral of the monomial x^e over S^{n-1} against the normalized measure.
/// Zero when any exponent is odd, otherwise prod_i (e_i - 1)!! / prod_{k<|e|/2} (n + 2k).
inline double sphere_monomial_moment(const MultiIndex& e) {
  const int n = e.size();
  if (n < 1) throw std::invalid_argument("sphere_monomial_moment: empty index");
  for (int t = 0; t < n; ++t)
    if (e[t] % 2 != 0) return 0.0;
  // Interleave numerator and denominator factors; every ratio is <= 1 so nothing overflows.
  double result = 1.0;
  int k = 0;
  for (int t = 0; t < n; ++t) {
    for (int f = e[t] - 1; f >= 1; f -= 2) {
      result *= static_cast<double>(f) / (n + 2.0 * k);
      ++k;
    }
  }
  return result;
}

/// Exact sphere integral of a polynomial.
inline double sphere_integral(const HomoPoly& T) {
  double s = 0.0;
  for (const auto& [e, c] : T.terms()) s += c * sphere_monomial_moment(e);
  return s;
}

inline double sphere_integral(const Polynomial& T) {
  double s = 0.0;
  for (const auto& [e, c] : T.terms()) s += c * sphere_monomial_moment(e);
  return s;
}

/// Exact sphere integral of the product A(x) B(x), without forming the product.
inline double sphere_integral_product(const HomoPoly& A, const HomoPoly& B) {
  if (A.n() != B.n()) throw std::invalid_argument("sphere_integral_product: variable count mismatch");
  if ((A.degree() + B.degree()) % 2 != 0) return 0.0;
  double s = 0.0;
  for (const auto& [ea, ca] : A.terms())
    for (const auto& [eb, cb] : B.terms()) s += ca * cb * sphere_monomial_moment(ea + eb);
  return s;
}

/// T = sum_j h_j r^{d-j} with every h_j harmonic; keys are the harmonic degrees j. Vanishing parts are omitted.
struct HarmonicDecomposition {
  int n = 0;
  int degree = 0;
  std::map<int, HomoPoly> parts;

  /// sum_j h_j r^{d-j} as a degree-d polynomial.
  HomoPoly reconstruct() const {
    HomoPoly out(n, degree);
    for (const auto& [j, h] : parts) out = out + multiply_r2(h, (degree - j) / 2);
    return out;
  }
};

/// Separation of variables by the iterated-Laplacian triangular solve.
inline HarmonicDecomposition harmonic_decompose(const HomoPoly& T) {
  const int n = T.n();
  const int d = T.degree();
  if (n < 2) throw std::invalid_argument("harmonic_decompose: n must be >= 2");
  const int smax = d / 2;

  // powers[t] = Laplacian^t T
  std::vector<HomoPoly> powers{T};
  for (int t = 1; t <= smax; ++t) powers.push_back(laplacian(powers.back()));

  // Laplacian^t (r^{2s} h_j) = coef(s,t,j) r^{2(s-t)} h_j
  auto coef = [n](int s, int t, int j) {
    double c = 1.0;
    for (int u = 0; u < t; ++u) c *= 2.0 * (s - u) * (2.0 * (s - u) + n - 2 + 2 * j);
    return c;
  };

  HarmonicDecomposition out{n, d, {}};
  for (int t = smax; t >= 0; --t) {
    const int j = d - 2 * t;
    HomoPoly rhs = powers[static_cast<std::size_t>(t)];
    for (int s = t + 1; s <= smax; ++s) {
      const int js = d - 2 * s;
      rhs = rhs - multiply_r2(out.parts.at(js), s - t) * coef(s, t, js);
    }
    out.parts.emplace(j, rhs * (1.0 / coef(t, t, j)));
  }

  const double scale = std::max(1.0, T.max_abs_coeff());
  if ((out.reconstruct() - T).max_abs_coeff() > 1e-8 * scale)
    throw std::runtime_error("harmonic_decompose: triangular solve is numerically unstable");
  for (auto it = out.parts.begin(); it != out.parts.end();) {
    if (it->second.max_abs_coeff() <= 1e-13 * scale)
      it = out.parts.erase(it);
    else
      ++it;
  }
  return out;
}

/// |int <x,y>^{2l} f(x) dx - (omega_{n-1}/omega_n) lambda(n,l,j) f(y)| for harmonic f of degree j.
/// The left side is evaluated exactly through monomial moments.
inline double funk_hecke_check(const HomoPoly& f, int l, const Eigen::Ref<const Eigen::VectorXd>& y) {
  const int n = f.n();
  if (y.size() != n) throw std::invalid_argument("funk_hecke_check: length mismatch");
  BasisCatalog kernel(n, 2 * l);
  const double log_fact = std::lgamma(2.0 * l + 1);
  double lhs = 0.0;
  for (const auto& k : kernel) {
    double yk = detail::monomial_value(k, y);
    if (yk == 0.0) continue;
    double w = std::exp(log_fact - k.log_factorial()) * yk;
    for (const auto& [e, c] : f.terms()) lhs += w * c * sphere_monomial_moment(k + e);
  }
  double rhs = std::exp(log_surface_area(n - 1) - log_surface_area(n)) * lambda_coeff(n, l, f.degree()) * f.eval(y);
  return std::abs(lhs - rhs);
}

}  // namespace sphereopt

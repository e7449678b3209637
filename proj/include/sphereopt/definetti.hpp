#pragma once

// Representing measures for maximally symmetric states and the resulting
// lower bounds. For a state M at level l the polynomial c Q_M with
// c = omega_n / (omega_{n-1} lambda(n, l, 0)) is a probability density with
// respect to the normalized sphere measure, and its moments give a separable
// approximation to every reduced state of M.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "harmonics.hpp"
#include "max_sym_matrix.hpp"
#include "oracle.hpp"
#include "sdp.hpp"

namespace sphereopt {

struct SphereMeasureDensity {
  int n = 0;
  HomoPoly density;                    ///< degree 2l, already multiplied by c
  double normalization_residual = 0.0; ///< |integral of density - 1|

  double eval(const Eigen::Ref<const Eigen::VectorXd>& x) const { return density.eval(x); }
};

/// omega_n / (omega_{n-1} lambda(n, l, 0))
inline double density_constant(int n, int l) {
  return std::exp(log_surface_area(n) - log_surface_area(n - 1) - log_lambda_coeff(n, l, 0));
}

namespace detail {

inline void require_state(const MaxSymMatrix& M, const char* who) {
  const double tr = M.trace();
  if (std::abs(tr - 1.0) > 1e-8) throw std::invalid_argument(std::string(who) + ": trace is " + std::to_string(tr) + ", not 1");
  const double emin =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M.matrix(), Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (emin < -1e-8) throw std::invalid_argument(std::string(who) + ": matrix is not positive semidefinite");
}

}  // namespace detail

inline SphereMeasureDensity measure_density(const MaxSymMatrix& M) {
  if (M.n() < 2) throw std::invalid_argument("measure_density: need n >= 2");
  detail::require_state(M, "measure_density");
  SphereMeasureDensity out;
  out.n = M.n();
  out.density = matrix_to_poly(M) * density_constant(M.n(), M.level());
  out.normalization_residual = std::abs(sphere_integral(out.density) - 1.0);
  return out;
}

/// Mtilde_a = int density(x) |x><x|^{(x) a} dx, assembled from its exact moments.
inline MaxSymMatrix approx_moment_matrix(const SphereMeasureDensity& mu, int a) {
  if (a < 0) throw std::invalid_argument("approx_moment_matrix: negative level");
  auto lay = msym_layout(mu.n, a);
  Eigen::VectorXd y(static_cast<Eigen::Index>(lay->q()));
  for (std::size_t k = 0; k < lay->q(); ++k) {
    double s = 0.0;
    for (const auto& [e, c] : mu.density.terms()) s += c * sphere_monomial_moment(e + lay->coeff_basis[k]);
    y(static_cast<Eigen::Index>(k)) = s;
  }
  return MaxSymMatrix::from_moments(mu.n, a, y);
}

inline MaxSymMatrix build_approx_moment_matrix(const MaxSymMatrix& M, int a) {
  if (a < 1 || a >= M.level()) throw std::invalid_argument("build_approx_moment_matrix: need 1 <= a < l");
  return approx_moment_matrix(measure_density(M), a);
}

/// Average of T under the measure: exact via monomial moments.
inline double lower_bound(const HomoPoly& T, const SphereMeasureDensity& mu) {
  if (T.n() != mu.n) throw std::invalid_argument("lower_bound: variable count mismatch");
  return sphere_integral_product(T, mu.density);
}

struct BoundsReport {
  int n = 0;
  int d = 0;
  int level = 0;
  double nu_ell = 0.0;     ///< upper bound (primal SDP value)
  double t_star = 0.0;     ///< dual SDP value
  double nu_tilde = 0.0;   ///< lower bound from the measure
  double eps = 0.0;
  bool eps_valid = false;
  double duality_gap = 0.0;
  int iterations = 0;
  std::optional<double> oracle_value;
  SphereMeasureDensity measure;
  std::optional<MaxSymMatrix> approx_moment;  ///< Mtilde_a, present when a < l
  SdpSolution solution;
};

/// Full pipeline at one level: relaxation, solve, measure, lower bound.
inline BoundsReport sandwich_report(const HomoPoly& T, int level, double tol = 1e-8,
                                    const std::optional<OracleOptions>& oracle = std::nullopt,
                                    const SdpSolver& solver = InteriorPointSolver()) {
  SdpProblem prob = build_relaxation(T, level);
  SdpSolution sol = solve_sdp(prob, tol, solver);
  if (sol.status != SdpStatus::optimal)
    throw SolverError(std::string("SDP solver stopped with status ") + to_string(sol.status) + " after " +
                      std::to_string(sol.iterations) + " iterations");
  BoundsReport r;
  r.n = T.n();
  r.d = T.degree();
  r.level = level;
  r.nu_ell = sol.nu_ell;
  r.t_star = sol.t_star;
  r.duality_gap = sol.duality_gap;
  r.iterations = sol.iterations;
  const int a = prob.a;
  auto e = definetti_eps(a, level, T.n());
  r.eps = e.value;
  r.eps_valid = e.valid;
  r.measure = measure_density(sol.M_star);
  r.nu_tilde = lower_bound(T, r.measure);
  if (a < level) r.approx_moment = approx_moment_matrix(r.measure, a);
  if (oracle) r.oracle_value = sphere_maximize(T, *oracle).value;
  r.solution = std::move(sol);
  return r;
}

/// Sum of absolute eigenvalues of A - B.
inline double trace_distance(const MaxSymMatrix& A, const MaxSymMatrix& B) {
  A.check_same_shape(B);
  Eigen::MatrixXd D = A.matrix() - B.matrix();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(D, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().sum();
}

struct TraceCheck {
  double distance;
  double bound;
  bool pass;
};

/// Distance between the a-body reduction of M and Mtilde_a against 2a^2(a+n/2-1)/(2l+n).
inline TraceCheck definetti_trace_check(const MaxSymMatrix& M, int a) {
  if (a < 1 || a >= M.level()) throw std::invalid_argument("definetti_trace_check: need 1 <= a < l");
  const int l = M.level(), n = M.n();
  double dist = trace_distance(partial_trace_sym(M, l - a), build_approx_moment_matrix(M, a));
  double bound = 2.0 * a * a * (a + 0.5 * n - 1) / (2.0 * l + n);
  return {dist, bound, dist <= bound + 1e-7};
}

/// Running maximum of |tr(Z_F (A - B))| / sup|F| over random degree-2a test polynomials F.
/// The sup-norm of each F is itself estimated from below (oracle ascent), so the
/// result is only an estimate of a lower bound on the F1 distance, never the norm.
inline double f1_distance_lower_estimate(const MaxSymMatrix& A, const MaxSymMatrix& B, int trials, std::uint64_t seed = 0) {
  A.check_same_shape(B);
  if (trials < 0) throw std::invalid_argument("f1_distance_lower_estimate: negative trial count");
  const Eigen::VectorXd dy = A.moments() - B.moments();
  const auto& cat = A.layout().coeff_basis;
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::normal_distribution<double> g(0.0, 1.0);
    HomoPoly F(A.n(), 2 * A.level());
    for (const auto& k : cat) F.add(k, g(rng));
    OracleOptions opt;
    opt.restarts = 10;
    opt.seed = derive_seed(seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(t));
    double sup = std::max(sphere_maximize(F, opt).value, sphere_maximize(F * -1.0, opt).value);
    if (!(sup > 0)) continue;
    double pairing = 0.0;
    for (std::size_t k = 0; k < cat.size(); ++k) pairing += F.coeff(cat[k]) * dy(static_cast<Eigen::Index>(k));
    best = std::max(best, std::abs(pairing) / sup);
  }
  return best;
}

/// Harmonic blocks of the minimal-degree P-density of M: q_j = (omega_{n-1}/omega_n) lambda(n,l,j) p_j.
inline HarmonicDecomposition p_from_q_coefficients(const MaxSymMatrix& M) {
  HarmonicDecomposition q = harmonic_decompose(matrix_to_poly(M));
  const int n = M.n(), l = M.level();
  HarmonicDecomposition p{q.n, q.degree, {}};
  for (const auto& [j, block] : q.parts) {
    double lam = lambda_coeff(n, l, j);
    if (!(lam > 0)) throw std::runtime_error("p_from_q_coefficients: vanishing lambda for a nonzero block j = " + std::to_string(j));
    p.parts.emplace(j, block * std::exp(log_surface_area(n) - log_surface_area(n - 1) - std::log(lam)));
  }
  return p;
}

/// Moments int P(x) x^k dx of a density given by harmonic blocks, as a level-l MaxSymMatrix.
inline MaxSymMatrix moments_from_density(const HarmonicDecomposition& P, int l) {
  SphereMeasureDensity mu{P.n, multiply_r2(P.reconstruct(), l - P.degree / 2), 0.0};
  return approx_moment_matrix(mu, l);
}

/// sum_i w_i |x_i><x_i|^{(x) l} with Dirichlet(1,...,1) weights and uniform unit x_i.
template <class Rng>
MaxSymMatrix random_product_mixture(int n, int l, int count, Rng& rng) {
  if (count < 1) throw std::invalid_argument("random_product_mixture: need at least one component");
  std::gamma_distribution<double> gam(1.0, 1.0);
  std::vector<double> w(static_cast<std::size_t>(count));
  double total = 0.0;
  for (double& v : w) total += (v = gam(rng));
  auto lay = msym_layout(n, l);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lay->q()));
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd x = sample_sphere(n, rng);
    for (std::size_t k = 0; k < lay->q(); ++k)
      y(static_cast<Eigen::Index>(k)) += w[static_cast<std::size_t>(i)] / total * detail::monomial_value(lay->coeff_basis[k], x);
  }
  return MaxSymMatrix::from_moments(n, l, y);
}

/// Optimal state of a level-l relaxation with a random Gaussian objective of degree 2l.
template <class Rng>
MaxSymMatrix random_sdp_state(int n, int l, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  HomoPoly T(n, 2 * l);
  for (const auto& k : enumerate_multiindices(n, 2 * l)) T.add(k, g(rng));
  SdpSolution sol = solve_sdp(build_relaxation(T, l), 1e-8);
  if (sol.status != SdpStatus::optimal) throw SolverError("random_sdp_state: solver did not converge");
  return sol.M_star;
}

}  // namespace sphereopt

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "sphereopt/definetti.hpp"
#include "test_util.hpp"

using namespace sphereopt;
using sphereopt::testing::quadratic_form;
using sphereopt::testing::random_homo_poly;
using sphereopt::testing::random_symmetric;
using sphereopt::testing::random_unit;

namespace {

MaxSymMatrix uniform_state(int n, int l) {
  auto lay = msym_layout(n, l);
  Eigen::VectorXd y(static_cast<Eigen::Index>(lay->q()));
  for (std::size_t k = 0; k < lay->q(); ++k) y(static_cast<Eigen::Index>(k)) = sphere_monomial_moment(lay->coeff_basis[k]);
  return MaxSymMatrix::from_moments(n, l, y);
}

MaxSymMatrix product_state(const Eigen::VectorXd& x, int l) {
  auto lay = msym_layout(static_cast<int>(x.size()), l);
  Eigen::VectorXd y(static_cast<Eigen::Index>(lay->q()));
  for (std::size_t k = 0; k < lay->q(); ++k) y(static_cast<Eigen::Index>(k)) = detail::monomial_value(lay->coeff_basis[k], x);
  return MaxSymMatrix::from_moments(static_cast<int>(x.size()), l, y);
}

double min_eig(const MaxSymMatrix& M) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M.matrix(), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

/// density(x) * x^k, for Monte-Carlo integration.
struct WeightedMonomial {
  const HomoPoly* density;
  MultiIndex k;
  int n() const { return density->n(); }
  double eval(const Eigen::VectorXd& x) const { return density->eval(x) * detail::monomial_value(k, x); }
};

}  // namespace

TEST(MeasureDensity, UniformStateGivesConstantOne) {
  std::mt19937_64 rng(61);
  for (int n = 2; n <= 4; ++n)
    for (int l = 1; l <= 4; ++l) {
      auto mu = measure_density(uniform_state(n, l));
      EXPECT_LT(mu.normalization_residual, 1e-10);
      for (int s = 0; s < 20; ++s) EXPECT_NEAR(mu.eval(random_unit(n, rng)), 1.0, 1e-9);
    }
}

TEST(MeasureDensity, PureProductState) {
  auto mu = measure_density(product_state(Eigen::Vector2d(1, 0), 3));
  const double c = density_constant(2, 3);
  EXPECT_NEAR(mu.density.coeff({6, 0}), c, 1e-12 * c);
  EXPECT_NEAR(mu.density.max_abs_coeff(), c, 1e-12 * c);
  EXPECT_NEAR(c * sphere_monomial_moment({6, 0}), 1.0, 1e-12);
  EXPECT_NEAR(std::exp(log_lambda_coeff(2, 3, 0)), std::exp(log_surface_area(2) - log_surface_area(1)) * sphere_monomial_moment({6, 0}), 1e-12);
}

TEST(MeasureDensity, RandomStatesAreNormalizedAndNonnegative) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 6; ++trial) {
    MaxSymMatrix M = trial % 2 ? random_product_mixture(3, 3, 5, rng) : random_sdp_state(3, 3, rng);
    auto mu = measure_density(M);
    EXPECT_LT(mu.normalization_residual, 1e-8);
    for (int s = 0; s < 1000; ++s) ASSERT_GE(mu.eval(random_unit(3, rng)), -1e-8);
  }
}

TEST(MeasureDensity, RejectsNonStates) {
  MaxSymMatrix U = uniform_state(3, 2);
  EXPECT_THROW(measure_density(U * 2.0), std::invalid_argument);
  MaxSymMatrix indefinite = product_state(Eigen::Vector3d(1, 0, 0), 2) * 2.0 - product_state(Eigen::Vector3d(0, 1, 0), 2);
  EXPECT_THROW(measure_density(indefinite), std::invalid_argument);
}

TEST(ApproxMoment, UniformStateReducesToUniform) {
  for (int l = 2; l <= 5; ++l)
    for (int a = 1; a < l; ++a) {
      MaxSymMatrix At = build_approx_moment_matrix(uniform_state(3, l), a);
      EXPECT_LT((At.moments() - uniform_state(3, a).moments()).lpNorm<Eigen::Infinity>(), 1e-10);
    }
  EXPECT_THROW(build_approx_moment_matrix(uniform_state(3, 3), 3), std::invalid_argument);
}

TEST(ApproxMoment, RandomStatesGiveStates) {
  std::mt19937_64 rng(63);
  for (int trial = 0; trial < 10; ++trial) {
    MaxSymMatrix M = random_product_mixture(3, 5, 4, rng);
    for (int a = 1; a <= 3; ++a) {
      MaxSymMatrix At = build_approx_moment_matrix(M, a);
      EXPECT_NEAR(At.trace(), 1.0, 1e-8);
      EXPECT_GE(min_eig(At), -1e-8);
    }
  }
}

TEST(ApproxMoment, MatchesMonteCarloIntegration) {
  std::mt19937_64 rng(64);
  MaxSymMatrix M = random_product_mixture(3, 4, 5, rng);
  auto mu = measure_density(M);
  MaxSymMatrix At = approx_moment_matrix(mu, 1);
  const auto& cat = At.layout().coeff_basis;
  Eigen::VectorXd y = At.moments();
  for (std::size_t k = 0; k < cat.size(); ++k) {
    auto est = mc_sphere_integral(WeightedMonomial{&mu.density, cat[k]}, 1000000, derive_seed(640, k));
    EXPECT_LE(std::abs(est.estimate - y(static_cast<Eigen::Index>(k))), 3 * est.standard_error) << cat[k].to_string();
  }
}

TEST(LowerBound, Examples) {
  std::mt19937_64 rng(65);
  MaxSymMatrix M = random_product_mixture(3, 4, 3, rng);
  auto mu = measure_density(M);
  for (int a = 1; a <= 3; ++a) EXPECT_NEAR(lower_bound(HomoPoly::r_power(3, a), mu), 1.0, 1e-9);
  HomoPoly x1sq(3, 2);
  x1sq.add({2, 0, 0}, 1.0);
  EXPECT_NEAR(lower_bound(x1sq, measure_density(uniform_state(3, 3))), 1.0 / 3.0, 1e-10);

  HomoPoly T = random_homo_poly(3, 4, rng);
  double oracle = sphere_maximize(T).value;
  EXPECT_LE(lower_bound(T, mu), oracle + 1e-6);
  // Pairing with the approximate moment matrix.
  MaxSymMatrix At = approx_moment_matrix(mu, 2);
  EXPECT_NEAR(lower_bound(T, mu), poly_to_maxsym_matrix(T).inner(At), 1e-9);
}

TEST(SandwichReport, QuadraticAtLevelTen) {
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 3; ++trial) {
    HomoPoly T = quadratic_form(random_symmetric(3, rng));
    auto r = sandwich_report(T, 10);
    EXPECT_NEAR(r.eps, 6.0 / 23.0, 1e-15);
    EXPECT_TRUE(r.eps_valid);
    EXPECT_LE(r.nu_tilde, r.nu_ell + 1e-7);
    if (r.nu_ell > 0) {
      EXPECT_LE(r.nu_ell - r.nu_tilde, r.eps * r.nu_ell + 1e-7);
    }
    ASSERT_TRUE(r.approx_moment.has_value());
    EXPECT_EQ(r.approx_moment->level(), 1);
  }
}

TEST(SandwichReport, SpherePower) {
  for (int l = 2; l <= 4; ++l) {
    auto r = sandwich_report(HomoPoly::r_power(3, 2), l);
    EXPECT_NEAR(r.nu_ell, 1.0, 1e-7);
    EXPECT_NEAR(r.nu_tilde, 1.0, 1e-7);
  }
}

TEST(SandwichReport, SoundnessAndShrinkingGap) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 5; ++trial) {
    HomoPoly T = random_homo_poly(3, 4, rng);
    double prev_gap = std::numeric_limits<double>::infinity();
    for (int l : {2, 4, 6}) {
      OracleOptions opt;
      opt.seed = static_cast<std::uint64_t>(trial);
      auto r = sandwich_report(T, l, 1e-8, opt);
      ASSERT_TRUE(r.oracle_value.has_value());
      EXPECT_LE(r.nu_tilde - 1e-6, *r.oracle_value);
      EXPECT_LE(*r.oracle_value, r.nu_ell + 1e-6);
      double gap = r.nu_ell - r.nu_tilde;
      EXPECT_LE(gap, prev_gap + 1e-9);
      prev_gap = gap;
      EXPECT_LT(r.measure.normalization_residual, 1e-8);
    }
  }
}

TEST(SandwichReport, ConvergenceInequalityForQuadratics) {
  std::mt19937_64 rng(68);
  for (int n = 3; n <= 4; ++n)
    for (int l = 2; l <= 6; ++l) {
      HomoPoly T = quadratic_form(random_symmetric(n, rng));
      auto r = sandwich_report(T, l);
      ASSERT_TRUE(r.eps_valid);
      if (r.nu_ell > 0) {
        EXPECT_LE(r.nu_ell - r.nu_tilde, r.eps * r.nu_ell + 1e-7);
      }
    }
}

TEST(SandwichReport, GapBoundedRelativeToRange) {
  std::mt19937_64 rng(68);
  for (int n = 3; n <= 4; ++n)
    for (int l = 2; l <= 6; ++l) {
      Eigen::MatrixXd A = random_symmetric(n, rng);
      Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues();
      auto r = sandwich_report(quadratic_form(A), l);
      EXPECT_NEAR(r.nu_ell, ev(n - 1), 1e-7);
      EXPECT_LE(r.nu_ell - r.nu_tilde, r.eps * (ev(n - 1) - ev(0)) + 1e-7);
    }
}

TEST(TraceDistance, Examples) {
  MaxSymMatrix A = product_state(Eigen::Vector3d(1, 0, 0), 2), B = product_state(Eigen::Vector3d(0, 1, 0), 2);
  EXPECT_NEAR(trace_distance(A, A), 0.0, 1e-14);
  EXPECT_NEAR(trace_distance(A, B), 2.0, 1e-12);
  std::mt19937_64 rng(69);
  MaxSymMatrix C = random_product_mixture(3, 2, 3, rng), D = random_product_mixture(3, 2, 3, rng);
  EXPECT_NEAR(trace_distance(C, D), trace_distance(D, C), 1e-12);
  EXPECT_THROW(trace_distance(A, uniform_state(3, 3)), std::invalid_argument);
}

TEST(DeFinettiTraceCheck, UniformState) {
  for (int l = 2; l <= 6; ++l)
    for (int a = 1; a < l && a <= 2; ++a) {
      auto chk = definetti_trace_check(uniform_state(3, l), a);
      EXPECT_LT(chk.distance, 1e-9);
      EXPECT_TRUE(chk.pass);
    }
}

TEST(DeFinettiTraceCheck, PureProductStateClosedForm) {
  // Q-density of e1^{(x)l} is x1^{2l}; under it x1^2 has mean (2l+1)/(2l+3) on S^2.
  for (int l = 2; l <= 12; ++l) {
    auto chk = definetti_trace_check(product_state(Eigen::Vector3d(1, 0, 0), l), 1);
    EXPECT_NEAR(chk.distance, 4.0 / (2 * l + 3), 1e-10);
    EXPECT_NEAR(chk.bound, 3.0 / (2 * l + 3), 1e-15);
  }
}

TEST(DeFinettiTraceCheck, RandomMixturesPass) {
  std::mt19937_64 rng(70);
  for (int trial = 0; trial < 200; ++trial) {
    auto chk = definetti_trace_check(random_product_mixture(3, 6, 5, rng), 1);
    ASSERT_TRUE(chk.pass) << chk.distance << " > " << chk.bound;
  }
}

TEST(DeFinettiTraceCheck, SdpStatesPass) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    MaxSymMatrix M = random_sdp_state(3, 4, rng);
    for (int a = 1; a <= 2; ++a) EXPECT_TRUE(definetti_trace_check(M, a).pass);
  }
}

TEST(DeFinettiTraceCheck, DistanceDecaysLikeInverseLevel) {
  // Same measure (five fixed product states) embedded at every level.
  std::mt19937_64 rng(72);
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < 5; ++i) pts.push_back(random_unit(3, rng));
  std::vector<double> xs, ys;
  for (int l = 4; l <= 12; ++l) {
    MaxSymMatrix M = product_state(pts[0], l) * 0.2;
    for (int i = 1; i < 5; ++i) M = M + product_state(pts[static_cast<std::size_t>(i)], l) * 0.2;
    xs.push_back(std::log(l));
    ys.push_back(std::log(definetti_trace_check(M, 1).distance));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / n, my += ys[i] / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
  double slope = sxy / sxx;
  EXPECT_GE(slope, -1.5);
  EXPECT_LE(slope, -0.5);
}

TEST(F1Estimate, Examples) {
  std::mt19937_64 rng(73);
  MaxSymMatrix A = random_product_mixture(3, 2, 3, rng);
  EXPECT_EQ(f1_distance_lower_estimate(A, A, 5, 1), 0.0);
  for (int trial = 0; trial < 3; ++trial) {
    MaxSymMatrix M = random_product_mixture(3, 6, 5, rng);
    for (int a = 1; a <= 2; ++a) {
      MaxSymMatrix reduced = partial_trace_sym(M, 6 - a);
      MaxSymMatrix At = build_approx_moment_matrix(M, a);
      double est = f1_distance_lower_estimate(reduced, At, 10, static_cast<std::uint64_t>(trial));
      EXPECT_LE(est, 4.0 * a * a * (a + 1.5 - 1) / (12.0 + 3) + 1e-6);
    }
  }
  MaxSymMatrix B = random_product_mixture(3, 2, 3, rng);
  double prev = 0.0;
  for (int k = 0; k <= 6; ++k) {
    double est = f1_distance_lower_estimate(A, B, k, 9);
    EXPECT_GE(est, prev);
    prev = est;
  }
  EXPECT_GT(prev, 0.0);
}

TEST(PvsQ, UniformStateHasConstantPDensity) {
  auto P = p_from_q_coefficients(uniform_state(3, 3));
  ASSERT_EQ(P.parts.size(), 1u);
  EXPECT_NEAR(P.parts.at(0).coeff({0, 0, 0}), 1.0, 1e-10);
}

TEST(PvsQ, MomentRoundTrip) {
  std::mt19937_64 rng(74);
  for (int l = 1; l <= 4; ++l)
    for (int trial = 0; trial < 3; ++trial) {
      MaxSymMatrix M = random_product_mixture(3, l, 4, rng);
      MaxSymMatrix back = moments_from_density(p_from_q_coefficients(M), l);
      EXPECT_LT((back.poly_coeffs() - M.poly_coeffs()).lpNorm<Eigen::Infinity>(), 1e-8 * std::max(1.0, M.poly_coeffs().lpNorm<Eigen::Infinity>()));
    }
}

TEST(PvsQ, BlockwiseScaling) {
  std::mt19937_64 rng(75);
  for (int trial = 0; trial < 4; ++trial) {
    MaxSymMatrix M = trial == 0 ? product_state(Eigen::Vector3d(1, 0, 0), 4) : random_sdp_state(3, 3, rng);
    const int l = M.level();
    auto Q = harmonic_decompose(matrix_to_poly(M));
    auto P = p_from_q_coefficients(M);
    ASSERT_EQ(P.parts.size(), Q.parts.size());
    for (const auto& [j, qj] : Q.parts) {
      double factor = surface_area(3 - 1) / surface_area(3) * lambda_coeff(3, l, j);
      EXPECT_LT((qj - P.parts.at(j) * factor).max_abs_coeff(), 1e-8 * std::max(1.0, qj.max_abs_coeff()));
    }
  }
}

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gegenbauer.hpp>

#include "sphereopt/cli.hpp"
#include "sphereopt/dense_oracle.hpp"
#include "test_util.hpp"

using namespace sphereopt;
using sphereopt::testing::quadratic_form;
using sphereopt::testing::random_homo_poly;
using sphereopt::testing::random_symmetric;
using sphereopt::testing::random_unit;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0: no runtime limit
  std::function<Outcome()> body;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double lambda_quadrature(int n, int l, int j) {
  const double lam = 0.5 * (n - 2);
  const double norm = boost::math::gegenbauer(static_cast<unsigned>(j), lam, 1.0);
  auto f = [=](double th) {
    double t = std::cos(th);
    return std::pow(t, 2 * l) * boost::math::gegenbauer(static_cast<unsigned>(j), lam, t) / norm * std::pow(std::sin(th), n - 2);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::numbers::pi, 15, 1e-14);
}

Outcome quadratic_exactness() {
  std::mt19937_64 rng(1001);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + trial % 3;
    Eigen::MatrixXd A = random_symmetric(n, rng);
    double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues()(n - 1);
    auto sol = solve_sdp(build_relaxation(quadratic_form(A), 1));
    worst = std::max(worst, std::abs(sol.nu_ell - lmax));
  }
  return {worst <= 1e-6, "max |nu_1 - lambda_max| = " + fmt("%.3g", worst) + " over 50 matrices"};
}

Outcome lambda_closed_form() {
  double worst = 0;
  bool zeros_exact = true;
  for (int n = 3; n <= 8; ++n)
    for (int l = 0; l <= 10; ++l) {
      for (int j = 0; j <= 2 * l; ++j) worst = std::max(worst, std::abs(lambda_coeff(n, l, j) - lambda_quadrature(n, l, j)));
      for (int j = 1; j <= 2 * l + 4; ++j)
        if ((j % 2 == 1 || j > 2 * l) && lambda_coeff(n, l, j) != 0.0) zeros_exact = false;
    }
  return {worst < 1e-9 && zeros_exact,
          "max |closed form - quadrature| = " + fmt("%.3g", worst) + (zeros_exact ? ", odd/high j exactly 0" : ", nonzero odd/high j")};
}

Outcome funk_hecke() {
  std::mt19937_64 rng(1003);
  double worst = 0;
  int count = 0;
  for (int j : {0, 2, 4})
    for (int l = 0; l <= 5; ++l)
      for (int trial = 0; trial < 4; ++trial) {
        HomoPoly f = random_homo_poly(3, j, rng);
        if (j >= 2) f = harmonic_decompose(f).parts.at(j);
        worst = std::max(worst, funk_hecke_check(f, l, random_unit(3, rng)));
        ++count;
      }
  return {worst < 1e-9, "max residual " + fmt("%.3g", worst) + " over " + std::to_string(count) + " harmonics"};
}

Outcome definetti_trace_bound() {
  std::mt19937_64 rng(1004);
  int trials = 0, violations = 0;
  double worst_ratio = 0;
  std::string worst_at;
  for (int n : {3, 4})
    for (int l : {4, 6, 8})
      for (int a : {1, 2})
        for (int trial = 0; trial < 200; ++trial) {
          int count = 1 + trial % 6;
          auto chk = definetti_trace_check(random_product_mixture(n, l, count, rng), a);
          ++trials;
          if (!chk.pass) ++violations;
          if (chk.distance / chk.bound > worst_ratio) {
            worst_ratio = chk.distance / chk.bound;
            worst_at = "n=" + std::to_string(n) + " l=" + std::to_string(l) + " a=" + std::to_string(a);
          }
        }
  return {violations == 0, std::to_string(violations) + "/" + std::to_string(trials) +
                               " states exceed the bound; worst distance/bound = " + fmt("%.4f", worst_ratio) + " at " + worst_at};
}

Outcome convergence_guarantee() {
  std::mt19937_64 rng(1005);
  const int a = 2, n = 3;
  int level = definetti_min_level(a, n);
  while (sym_dimension(n, level) > configured_max_p()) --level;
  int sandwich_fail = 0, eps_fail = 0, valid = 0;
  double worst_rel = 0;
  for (int trial = 0; trial < 20; ++trial) {
    HomoPoly T = random_homo_poly(n, 2 * a, rng);
    OracleOptions opt;
    opt.seed = static_cast<std::uint64_t>(trial);
    auto r = sandwich_report(T, level, 1e-8, opt);
    double nu_hat = *r.oracle_value;
    if (!(r.nu_tilde <= nu_hat + 1e-6 && nu_hat <= r.nu_ell + 1e-6)) ++sandwich_fail;
    if (r.eps_valid) {
      ++valid;
      if (r.nu_ell > 0 && r.nu_ell - r.nu_tilde > r.eps * r.nu_ell + 1e-7) ++eps_fail;
      if (r.nu_ell > 0) worst_rel = std::max(worst_rel, (r.nu_ell - r.nu_tilde) / r.nu_ell);
    }
  }
  return {sandwich_fail == 0 && eps_fail == 0,
          "l=" + std::to_string(level) + ", eps=" + fmt("%.4f", definetti_eps(a, level, n).value) + ", eps_valid on " +
              std::to_string(valid) + "/20; sandwich failures " + std::to_string(sandwich_fail) + ", eps-inequality failures " +
              std::to_string(eps_fail) + ", worst relative gap " + fmt("%.4f", worst_rel)};
}

Outcome hierarchy_monotonicity() {
  std::mt19937_64 rng(1006);
  int fail = 0;
  for (int trial = 0; trial < 20; ++trial) {
    HomoPoly T = random_homo_poly(3, 4, rng);
    double nu2 = solve_sdp(build_relaxation(T, 2)).nu_ell;
    double nu3 = solve_sdp(build_relaxation(T, 3)).nu_ell;
    double nu4 = solve_sdp(build_relaxation(T, 4)).nu_ell;
    OracleOptions opt;
    opt.seed = static_cast<std::uint64_t>(trial);
    double hat = sphere_maximize(T, opt).value;
    if (!(nu2 >= nu3 - 1e-6 && nu3 >= nu4 - 1e-6 && nu4 >= hat - 1e-6)) ++fail;
  }
  return {fail == 0, std::to_string(fail) + "/20 quartics violate nu_2 >= nu_3 >= nu_4 >= oracle"};
}

Outcome odd_pipeline() {
  std::mt19937_64 rng(1007);
  double worst_lift = 0;
  int bracket_fail = 0;
  for (int trial = 0; trial < 10; ++trial) {
    int n = 2 + trial % 2;
    HomoPoly T = random_homo_poly(n, 3, rng);
    auto [L, rec] = lift_odd(T);
    OracleOptions opt;
    opt.seed = static_cast<std::uint64_t>(trial);
    double hat = sphere_maximize(T, opt).value;
    double hat_lift = sphere_maximize(L, opt).value;
    worst_lift = std::max(worst_lift, std::abs(hat_lift - gamma_factor(2) * hat));
    BoundsReport p = pullback_bounds(sandwich_report(L, 4), rec);
    if (!(p.nu_tilde <= hat + 1e-6 && hat <= p.nu_ell + 1e-6)) ++bracket_fail;
  }
  return {worst_lift <= 1e-5 && bracket_fail == 0,
          "max |max T' - gamma(2) max T| = " + fmt("%.3g", worst_lift) + ", bracket failures " + std::to_string(bracket_fail) + "/10"};
}

Outcome encoding_faithfulness() {
  std::mt19937_64 rng(1008);
  double worst = 0;
  for (int n = 1; n <= 3; ++n)
    for (int a = 1; a <= 2; ++a) {
      const long dim = dense::product_dim(n, a);
      Eigen::MatrixXd sym2a = dense::dense_symmetrizer(n, 2 * a);
      Eigen::MatrixXd V = dense::number_state_isometry(n, a);
      for (int trial = 0; trial < 20; ++trial) {
        HomoPoly T = random_homo_poly(n, 2 * a, rng);
        Eigen::VectorXd vec = Eigen::VectorXd::Zero(dim * dim);
        for (const auto& [k, c] : T.terms()) {
          std::vector<int> str;
          for (int t = 0; t < n; ++t)
            for (int r = 0; r < k[t]; ++r) str.push_back(t);
          vec(dense::position(str, n)) += c;
        }
        Eigen::VectorXd sym = sym2a * vec;
        Eigen::MatrixXd Zfull = Eigen::Map<Eigen::MatrixXd>(sym.data(), dim, dim).transpose();
        Eigen::MatrixXd Zsym = V.transpose() * Zfull * V;
        worst = std::max(worst, (Zsym - poly_to_maxsym_matrix(T).matrix()).cwiseAbs().maxCoeff());
      }
    }
  return {worst <= 1e-10, "max entrywise difference " + fmt("%.3g", worst) + " over 120 polynomials"};
}

Outcome p_vs_q() {
  std::mt19937_64 rng(1009);
  double worst_block = 0, worst_round = 0;
  for (int trial = 0; trial < 50; ++trial) {
    int l = 1 + trial % 4;
    MaxSymMatrix M = trial % 2 ? random_product_mixture(3, l, 1 + trial % 5, rng) : random_sdp_state(3, l, rng);
    auto Q = harmonic_decompose(matrix_to_poly(M));
    auto P = p_from_q_coefficients(M);
    for (const auto& [j, qj] : Q.parts) {
      double factor = std::exp(log_surface_area(2) - log_surface_area(3)) * lambda_coeff(3, l, j);
      auto it = P.parts.find(j);
      HomoPoly pj = it == P.parts.end() ? HomoPoly(qj.n(), qj.degree()) : it->second;
      worst_block = std::max(worst_block, (qj - pj * factor).max_abs_coeff() / std::max(1.0, qj.max_abs_coeff()));
    }
    MaxSymMatrix back = moments_from_density(P, l);
    worst_round = std::max(worst_round, (back.poly_coeffs() - M.poly_coeffs()).lpNorm<Eigen::Infinity>() /
                                            std::max(1.0, M.poly_coeffs().lpNorm<Eigen::Infinity>()));
  }
  return {worst_block <= 1e-8 && worst_round <= 1e-8,
          "max block mismatch " + fmt("%.3g", worst_block) + ", max moment round-trip error " + fmt("%.3g", worst_round)};
}

Outcome solver_quality() {
  std::mt19937_64 rng(1010);
  int instances = 0, gap_fail = 0, iter_fail = 0, repro_fail = 0, max_iter = 0;
  double worst_gap = 0;
  std::map<int, std::pair<int, int>> failing_levels;  // n -> (min l, count)
  for (int n = 2; n <= 4; ++n)
    for (int d : {2, 4, 6})
      for (int l = d / 2; sym_dimension(n, l) <= 100; ++l) {
        HomoPoly T = random_homo_poly(n, d, rng);
        SdpProblem prob = build_relaxation(T, l);
        SdpSolution s1 = solve_sdp(prob, 1e-9), s2 = solve_sdp(prob, 1e-9);
        ++instances;
        bool bad = s1.status != SdpStatus::optimal || s1.duality_gap > 1e-8 || s1.iterations > 100;
        if (s1.status != SdpStatus::optimal || s1.duality_gap > 1e-8) ++gap_fail;
        if (s1.iterations > 100) ++iter_fail;
        if (std::memcmp(&s1.nu_ell, &s2.nu_ell, sizeof(double)) != 0) ++repro_fail;
        if (bad) {
          auto [it, fresh] = failing_levels.try_emplace(n, l, 0);
          it->second.first = std::min(it->second.first, l);
          ++it->second.second;
        } else {
          worst_gap = std::max(worst_gap, s1.duality_gap);
          max_iter = std::max(max_iter, s1.iterations);
        }
      }
  std::string detail = std::to_string(instances) + " instances with p <= 100; converged ones: max gap " + fmt("%.3g", worst_gap) +
                       ", max iterations " + std::to_string(max_iter) + "; non-reproducible " + std::to_string(repro_fail);
  for (const auto& [n, info] : failing_levels)
    detail += "; n=" + std::to_string(n) + ": " + std::to_string(info.second) + " failures, smallest failing l = " + std::to_string(info.first);
  return {gap_fail == 0 && iter_fail == 0 && repro_fail == 0, detail};
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "quadratic exactness", 10, quadratic_exactness},
      {2, "lambda closed form", 5, lambda_closed_form},
      {3, "Funk-Hecke identity", 10, funk_hecke},
      {4, "de Finetti trace bound", 120, definetti_trace_bound},
      {5, "convergence guarantee", 600, convergence_guarantee},
      {6, "hierarchy monotonicity", 120, hierarchy_monotonicity},
      {7, "odd-degree pipeline", 60, odd_pipeline},
      {8, "encoding faithfulness", 30, encoding_faithfulness},
      {9, "P/Q relation", 30, p_vs_q},
      {10, "solver quality", 0, solver_quality},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_budget = c.budget_s == 0 || secs < c.budget_s;
    bool pass = o.pass && in_budget;
    if (!pass) ++failures;
    std::string budget = c.budget_s == 0 ? "" : " / " + fmt("%.0f", c.budget_s) + " s";
    std::printf("%s criterion %d (%s): %s [%.1f s%s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                secs, budget.c_str(), in_budget ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

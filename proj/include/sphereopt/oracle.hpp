#pragma once

// Ground-truth machinery for desk-scale instances: multistart projected gradient
// ascent on the sphere and Monte-Carlo sphere quadrature.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "polynomial.hpp"

namespace sphereopt {

/// Deterministic per-task seed derived from a root seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform point on S^{n-1} via a normalized standard Gaussian vector.
template <class Rng>
Eigen::VectorXd sample_sphere(int n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd x(n);
  double norm = 0.0;
  while (norm < 1e-300) {
    for (int t = 0; t < n; ++t) x(t) = g(rng);
    norm = x.norm();
  }
  return x / norm;
}

struct OracleOptions {
  int restarts = 50;
  int max_iterations = 500;
  double initial_step = 0.1;
  double step_tolerance = 1e-12;
  std::uint64_t seed = 0;
};

struct OracleResult {
  double value = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd argmax;
  int restarts_used = 0;
  bool converged = false;  ///< the best restart stopped on the step criterion
};

namespace detail {

struct AscentRun {
  Eigen::VectorXd x;
  double value;
  bool converged;
};

inline AscentRun ascend(const HomoPoly& T, Eigen::VectorXd x, const OracleOptions& opt) {
  double fx = T.eval(x);
  for (int it = 0; it < opt.max_iterations; ++it) {
    Eigen::VectorXd g = T.gradient(x);
    g -= g.dot(x) * x;  // tangent component
    double eta = opt.initial_step;
    bool moved = false;
    while (eta * g.norm() >= opt.step_tolerance) {
      Eigen::VectorXd cand = (x + eta * g).normalized();
      double fc = T.eval(cand);
      if (fc > fx) {
        double step = (cand - x).norm();
        x = cand;
        fx = fc;
        moved = true;
        if (step < opt.step_tolerance) return {x, fx, true};
        break;
      }
      eta *= 0.5;
    }
    if (!moved) return {x, fx, true};
  }
  return {x, fx, false};
}

}  // namespace detail

/// Best value of T over S^{n-1} found by multistart projected gradient ascent.
/// A lower bound on the true maximum; deterministic for a fixed seed.
inline OracleResult sphere_maximize(const HomoPoly& T, const OracleOptions& opt = {}) {
  if (opt.restarts < 1) throw std::invalid_argument("sphere_maximize: restarts must be >= 1");
  OracleResult best;
  for (int r = 0; r < opt.restarts; ++r) {
    std::mt19937_64 rng(derive_seed(opt.seed, static_cast<std::uint64_t>(r)));
    auto run = detail::ascend(T, sample_sphere(T.n(), rng), opt);
    if (run.value > best.value) {
      best.value = run.value;
      best.argmax = run.x;
      best.converged = run.converged;
    }
    best.restarts_used = r + 1;
  }
  // Report the value at the returned point exactly.
  best.argmax.normalize();
  best.value = T.eval(best.argmax);
  return best;
}

struct McEstimate {
  double estimate;
  double standard_error;
};

/// Monte-Carlo mean of f over uniform points of S^{n-1}.
template <class Poly>
McEstimate mc_sphere_integral(const Poly& f, long samples, std::uint64_t seed) {
  if (samples < 1000) throw std::invalid_argument("mc_sphere_integral: need at least 1000 samples");
  std::mt19937_64 rng(seed);
  double mean = 0.0, m2 = 0.0;
  for (long s = 0; s < samples; ++s) {
    double v = f.eval(sample_sphere(f.n(), rng));
    double delta = v - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (v - mean);
  }
  double var = m2 / static_cast<double>(samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

}  // namespace sphereopt

#pragma once

// Bringing inputs into canonical form: homogeneous of even degree.

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "definetti.hpp"
#include "polynomial.hpp"

namespace sphereopt {

enum class ReductionKind { even_homogenize, odd_lift };

inline std::string to_string(ReductionKind k) { return k == ReductionKind::odd_lift ? "odd-lift" : "even-homogenize"; }

struct ReductionRecord {
  ReductionKind kind = ReductionKind::even_homogenize;
  int n = 0;
  int d = 0;
  int lifted_n = 0;
  int lifted_d = 0;
  double gamma = 1.0;
};

/// Pads every monomial of degree d' with r^{d-d'}. d defaults to the largest degree present.
inline std::pair<HomoPoly, ReductionRecord> homogenize_even(const Polynomial& T, int d = -1) {
  if (T.is_zero()) throw std::invalid_argument("homogenize_even: zero polynomial");
  const int top = T.max_degree();
  if (d < 0) d = top;
  if (d % 2 != 0) throw std::invalid_argument("homogenize_even: target degree must be even");
  if (d < top) throw std::invalid_argument("homogenize_even: target degree below the polynomial degree");
  HomoPoly out(T.n(), d);
  for (const auto& [e, c] : T.terms()) {
    if (e.degree() % 2 != 0)
      throw std::invalid_argument("homogenize_even: monomial " + e.to_string() + " has odd degree");
    HomoPoly mono(T.n(), e.degree());
    mono.add(e, c);
    out = out + multiply_r2(mono, (d - e.degree()) / 2);
  }
  return {out, ReductionRecord{ReductionKind::even_homogenize, T.n(), top, T.n(), d, 1.0}};
}

/// gamma(a) = max_{c >= 0} c^{2a-1} / (1+c^2)^a = (2a-1)^{a-1/2} / (a^a 2^a).
inline double gamma_factor(int a) {
  if (a < 1) throw std::invalid_argument("gamma_factor: a must be >= 1");
  const double x = a;
  return std::exp((x - 0.5) * std::log(2 * x - 1) - x * std::log(x) - x * std::log(2.0));
}

/// T'(x0, x) = x0 T(x), with x0 the first variable. max T' on S^n = gamma(a) max T on S^{n-1}.
inline std::pair<HomoPoly, ReductionRecord> lift_odd(const HomoPoly& T) {
  if (T.degree() % 2 == 0) throw std::invalid_argument("lift_odd: degree must be odd");
  HomoPoly out(T.n() + 1, T.degree() + 1);
  for (const auto& [e, c] : T.terms()) out.add(e.prepend(1), c);
  const int a = (T.degree() + 1) / 2;
  return {out, ReductionRecord{ReductionKind::odd_lift, T.n(), T.degree(), T.n() + 1, T.degree() + 1, gamma_factor(a)}};
}

/// Rescales a report on the lifted problem back to the original one. The measure and
/// solution stay on the lifted sphere.
inline BoundsReport pullback_bounds(BoundsReport report, const ReductionRecord& rec) {
  if (report.n != rec.lifted_n || report.d != rec.lifted_d)
    throw std::invalid_argument("pullback_bounds: record does not match the report");
  if (!(rec.gamma > 0)) throw std::invalid_argument("pullback_bounds: gamma must be positive");
  report.n = rec.n;
  report.d = rec.d;
  report.nu_ell /= rec.gamma;
  report.t_star /= rec.gamma;
  report.nu_tilde /= rec.gamma;
  report.duality_gap /= rec.gamma;
  if (report.oracle_value) *report.oracle_value /= rec.gamma;
  return report;
}

}  // namespace sphereopt

#pragma once

// Sparse real polynomials keyed by exact multi-indices.

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "multi_index.hpp"

namespace sphereopt {

using TermMap = std::map<MultiIndex, double>;

namespace detail {

inline double monomial_value(const MultiIndex& e, const Eigen::Ref<const Eigen::VectorXd>& x) {
  double v = 1.0;
  for (int t = 0; t < e.size(); ++t) {
    for (int p = 0; p < e[t]; ++p) v *= x(t);
  }
  return v;
}

inline void add_term(TermMap& terms, const MultiIndex& e, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = terms.emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms.erase(it);
  }
}

inline std::string format_terms(const TermMap& terms) {
  if (terms.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (auto it = terms.begin(); it != terms.end(); ++it) {
    double c = it->second;
    const MultiIndex& e = it->first;
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    double a = std::abs(c);
    bool wrote = false;
    if (a != 1.0 || e.degree() == 0) {
      os << a;
      wrote = true;
    }
    for (int t = 0; t < e.size(); ++t) {
      if (e[t] == 0) continue;
      if (wrote) os << "*";
      os << "x" << (t + 1);
      if (e[t] > 1) os << "^" << e[t];
      wrote = true;
    }
  }
  return os.str();
}

}  // namespace detail

/// A polynomial whose monomials may have different degrees. Parsed input lands here
/// before reduction to homogeneous form.
class Polynomial {
public:
  Polynomial() = default;
  explicit Polynomial(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("Polynomial: n must be >= 1");
  }

  Polynomial(int n, const TermMap& terms) : Polynomial(n) {
    for (const auto& [e, c] : terms) add(e, c);
  }

  int n() const { return n_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add(const MultiIndex& e, double c) {
    if (e.size() != n_) throw std::invalid_argument("Polynomial: term has wrong variable count");
    detail::add_term(terms_, e, c);
  }

  int max_degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e.degree());
    return d;
  }

  bool is_homogeneous() const {
    if (terms_.empty()) return true;
    const int d = terms_.begin()->first.degree();
    for (const auto& [e, c] : terms_)
      if (e.degree() != d) return false;
    return true;
  }

  double eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != n_) throw std::invalid_argument("Polynomial::eval: length mismatch");
    double s = 0.0;
    for (const auto& [e, c] : terms_) s += c * detail::monomial_value(e, x);
    return s;
  }

  std::string to_string() const { return detail::format_terms(terms_); }

private:
  int n_ = 1;
  TermMap terms_;
};

/// Homogeneous polynomial of degree d in n variables.
class HomoPoly {
public:
  HomoPoly() = default;
  HomoPoly(int n, int degree) : n_(n), degree_(degree) {
    if (n < 1) throw std::invalid_argument("HomoPoly: n must be >= 1");
    if (degree < 0) throw std::invalid_argument("HomoPoly: negative degree");
  }

  HomoPoly(int n, int degree, const TermMap& terms) : HomoPoly(n, degree) {
    for (const auto& [e, c] : terms) add(e, c);
  }

  /// Throws if p is not homogeneous. The zero polynomial takes `degree_if_zero`.
  static HomoPoly from_polynomial(const Polynomial& p, int degree_if_zero = 0) {
    if (!p.is_homogeneous()) throw std::invalid_argument("HomoPoly: polynomial is not homogeneous");
    int d = p.is_zero() ? degree_if_zero : p.terms().begin()->first.degree();
    return HomoPoly(p.n(), d, p.terms());
  }

  /// (x_1^2 + ... + x_n^2)^k
  static HomoPoly r_power(int n, int k);

  int n() const { return n_; }
  int degree() const { return degree_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  double coeff(const MultiIndex& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? 0.0 : it->second;
  }

  void add(const MultiIndex& e, double c) {
    if (e.size() != n_) throw std::invalid_argument("HomoPoly: term has wrong variable count");
    if (e.degree() != degree_)
      throw std::invalid_argument("HomoPoly: term " + e.to_string() + " is not of degree " + std::to_string(degree_));
    detail::add_term(terms_, e, c);
  }

  double eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != n_) throw std::invalid_argument("HomoPoly::eval: length mismatch");
    double s = 0.0;
    for (const auto& [e, c] : terms_) s += c * detail::monomial_value(e, x);
    return s;
  }

  /// Exact gradient via the exponent-shift rule.
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != n_) throw std::invalid_argument("HomoPoly::gradient: length mismatch");
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
    for (const auto& [e, c] : terms_) {
      for (int t = 0; t < n_; ++t) {
        if (e[t] == 0) continue;
        MultiIndex lower;
        e.shifted(t, -1, &lower);
        g(t) += c * e[t] * detail::monomial_value(lower, x);
      }
    }
    return g;
  }

  HomoPoly operator*(double s) const {
    HomoPoly out(n_, degree_);
    if (s != 0.0)
      for (const auto& [e, c] : terms_) out.terms_.emplace(e, c * s);
    return out;
  }

  HomoPoly operator+(const HomoPoly& o) const {
    check_compatible(o);
    HomoPoly out(*this);
    for (const auto& [e, c] : o.terms_) detail::add_term(out.terms_, e, c);
    return out;
  }

  HomoPoly operator-(const HomoPoly& o) const { return *this + o * -1.0; }

  /// Largest absolute coefficient.
  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  /// Drop coefficients with |c| <= tol.
  HomoPoly pruned(double tol) const {
    HomoPoly out(n_, degree_);
    for (const auto& [e, c] : terms_)
      if (std::abs(c) > tol) out.terms_.emplace(e, c);
    return out;
  }

  Polynomial to_polynomial() const { return Polynomial(n_, terms_); }
  std::string to_string() const { return detail::format_terms(terms_); }

private:
  void check_compatible(const HomoPoly& o) const {
    if (o.n_ != n_ || o.degree_ != degree_) throw std::invalid_argument("HomoPoly: shape mismatch");
  }

  int n_ = 1;
  int degree_ = 0;
  TermMap terms_;
};

/// T(x) * r(x)^{2k}
inline HomoPoly multiply_r2(const HomoPoly& T, int k) {
  if (k < 0) throw std::invalid_argument("multiply_r2: negative power");
  HomoPoly cur = T;
  for (int s = 0; s < k; ++s) {
    TermMap next;
    for (const auto& [e, c] : cur.terms()) {
      for (int t = 0; t < T.n(); ++t) {
        MultiIndex up;
        e.shifted(t, 2, &up);
        detail::add_term(next, up, c);
      }
    }
    cur = HomoPoly(T.n(), cur.degree() + 2, next);
  }
  return cur;
}

inline HomoPoly HomoPoly::r_power(int n, int k) {
  HomoPoly one(n, 0);
  one.add(MultiIndex::zero(n), 1.0);
  return multiply_r2(one, k);
}

/// sum_t d^2 T / dx_t^2
inline HomoPoly laplacian(const HomoPoly& T) {
  if (T.degree() < 2) throw std::invalid_argument("laplacian: degree must be >= 2");
  HomoPoly out(T.n(), T.degree() - 2);
  for (const auto& [e, c] : T.terms()) {
    for (int t = 0; t < T.n(); ++t) {
      if (e[t] < 2) continue;
      MultiIndex lower;
      e.shifted(t, -2, &lower);
      out.add(lower, c * e[t] * (e[t] - 1));
    }
  }
  return out;
}

/// Coefficient vector of |Z_T> in the degree-d number-state basis: entry sqrt(i!/d!) * alpha_i.
inline Eigen::VectorXd poly_to_vector(const HomoPoly& T, const BasisCatalog& cat) {
  if (cat.n() != T.n() || cat.degree() != T.degree()) throw std::invalid_argument("poly_to_vector: catalog mismatch");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cat.size()));
  const double log_dfact = std::lgamma(T.degree() + 1.0);
  for (const auto& [e, c] : T.terms())
    v(static_cast<Eigen::Index>(cat.position(e))) = std::sqrt(std::exp(e.log_factorial() - log_dfact)) * c;
  return v;
}

inline Eigen::VectorXd poly_to_vector(const HomoPoly& T) { return poly_to_vector(T, BasisCatalog(T.n(), T.degree())); }

/// Inverse of poly_to_vector.
inline HomoPoly vector_to_poly(const Eigen::Ref<const Eigen::VectorXd>& v, const BasisCatalog& cat) {
  if (static_cast<std::size_t>(v.size()) != cat.size()) throw std::invalid_argument("vector_to_poly: size mismatch");
  HomoPoly out(cat.n(), cat.degree());
  const double log_dfact = std::lgamma(cat.degree() + 1.0);
  for (std::size_t k = 0; k < cat.size(); ++k) {
    double c = v(static_cast<Eigen::Index>(k));
    if (c != 0.0) out.add(cat[k], c * std::sqrt(std::exp(log_dfact - cat[k].log_factorial())));
  }
  return out;
}

}  // namespace sphereopt

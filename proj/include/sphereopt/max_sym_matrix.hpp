#pragma once

// Maximally symmetric matrices on Sym((R^n)^{(x) l}) and their one-to-one
// correspondence with homogeneous polynomials of degree 2l.
//
// A MaxSymMatrix M is stored through the coefficients of its Q-polynomial
// Q_M(x) = <x|^{(x) l} M |x>^{(x) l}. Three coordinate systems are in use, all
// indexed by the degree-2l catalog:
//   poly coefficients    alpha_k
//   number-state coords  m_k = sqrt(k!/(2l)!) alpha_k   (orthonormal basis B_k of MSym)
//   moment coords        y_k = (k!/(2l)!) alpha_k        (M = int |x><x|^{(x) l} dmu  =>  y_k = int x^k dmu)
// The p x p matrix in the degree-l number-state basis is a derived view with
// entries M(i,j) = <i (x) j | k> m_k for k = i + j.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "multi_index.hpp"
#include "polynomial.hpp"

namespace sphereopt {

/// Index tables shared by every MaxSymMatrix with the same (n, l).
struct MsymLayout {
  int n;
  int l;
  BasisCatalog basis;        ///< degree l, size p
  BasisCatalog coeff_basis;  ///< degree 2l, size q
  std::vector<int> pair_coeff;       ///< p*p table: (a,b) -> position of basis[a] + basis[b]
  std::vector<double> pair_overlap;  ///< p*p table: <a (x) b | a + b>
  Eigen::VectorXd trace_vector;      ///< tau_k = tr(B_k)
  Eigen::VectorXd number_scale;      ///< sqrt(k!/(2l)!) per coefficient

  MsymLayout(int n_, int l_) : n(n_), l(l_), basis(n_, l_), coeff_basis(n_, 2 * l_) {
    const std::size_t p = basis.size();
    const std::size_t q = coeff_basis.size();
    pair_coeff.resize(p * p);
    pair_overlap.resize(p * p);
    trace_vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q));
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a; b < p; ++b) {
        MultiIndex k = basis[a] + basis[b];
        int pos = static_cast<int>(coeff_basis.position(k));
        double ov = number_state_overlap(basis[a], basis[b], k);
        pair_coeff[a * p + b] = pair_coeff[b * p + a] = pos;
        pair_overlap[a * p + b] = pair_overlap[b * p + a] = ov;
      }
      trace_vector(pair_coeff[a * p + a]) += pair_overlap[a * p + a];
    }
    const double log_fact = std::lgamma(2.0 * l + 1);
    number_scale.resize(static_cast<Eigen::Index>(q));
    for (std::size_t k = 0; k < q; ++k)
      number_scale(static_cast<Eigen::Index>(k)) = std::exp(0.5 * (coeff_basis[k].log_factorial() - log_fact));
  }

  std::size_t p() const { return basis.size(); }
  std::size_t q() const { return coeff_basis.size(); }

  /// sum_k m_k B_k as a dense p x p matrix.
  Eigen::MatrixXd assemble(const Eigen::Ref<const Eigen::VectorXd>& m) const {
    const std::size_t pp = p();
    Eigen::MatrixXd A(pp, pp);
    for (std::size_t a = 0; a < pp; ++a)
      for (std::size_t b = 0; b < pp; ++b) A(a, b) = pair_overlap[a * pp + b] * m(pair_coeff[a * pp + b]);
    return A;
  }

  /// Adjoint of assemble: (<B_k, A>)_k. Orthogonal projection onto MSym in number-state coordinates.
  Eigen::VectorXd project(const Eigen::Ref<const Eigen::MatrixXd>& A) const {
    const std::size_t pp = p();
    Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q()));
    for (std::size_t a = 0; a < pp; ++a)
      for (std::size_t b = 0; b < pp; ++b) m(pair_coeff[a * pp + b]) += pair_overlap[a * pp + b] * A(a, b);
    return m;
  }
};

/// Number-state coordinates of |x>^{(x) l}: entry sqrt(l!/i!) x^i.
inline Eigen::VectorXd product_state_vector(const Eigen::Ref<const Eigen::VectorXd>& x, const BasisCatalog& basis) {
  if (x.size() != basis.n()) throw std::invalid_argument("product_state_vector: length mismatch");
  const double log_fact = std::lgamma(basis.degree() + 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k)
    v(static_cast<Eigen::Index>(k)) = std::exp(0.5 * (log_fact - basis[k].log_factorial())) * detail::monomial_value(basis[k], x);
  return v;
}

/// Memoized layout; tables are immutable once built.
inline std::shared_ptr<const MsymLayout> msym_layout(int n, int l) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const MsymLayout>> cache;
  if (n < 1 || l < 0) throw std::invalid_argument("msym_layout: bad shape");
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, l}];
  if (!slot) slot = std::make_shared<const MsymLayout>(n, l);
  return slot;
}

class MaxSymMatrix {
public:
  MaxSymMatrix() = default;

  static MaxSymMatrix zero(int n, int l) {
    auto lay = msym_layout(n, l);
    return MaxSymMatrix(lay, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lay->q())));
  }

  static MaxSymMatrix from_poly_coeffs(int n, int l, Eigen::VectorXd alpha) {
    auto lay = msym_layout(n, l);
    check_size(*lay, alpha);
    return MaxSymMatrix(lay, std::move(alpha));
  }

  static MaxSymMatrix from_number_state(int n, int l, const Eigen::Ref<const Eigen::VectorXd>& m) {
    auto lay = msym_layout(n, l);
    check_size(*lay, m);
    return MaxSymMatrix(lay, m.cwiseQuotient(lay->number_scale));
  }

  static MaxSymMatrix from_moments(int n, int l, const Eigen::Ref<const Eigen::VectorXd>& y) {
    auto lay = msym_layout(n, l);
    check_size(*lay, y);
    return MaxSymMatrix(lay, y.cwiseQuotient(lay->number_scale.cwiseAbs2()));
  }

  /// Orthogonal projection of a p x p matrix onto MSym.
  static MaxSymMatrix from_matrix(int n, int l, const Eigen::Ref<const Eigen::MatrixXd>& A) {
    auto lay = msym_layout(n, l);
    if (static_cast<std::size_t>(A.rows()) != lay->p() || A.rows() != A.cols())
      throw std::invalid_argument("MaxSymMatrix::from_matrix: shape mismatch");
    return from_number_state(n, l, lay->project(A));
  }

  int n() const { return layout_->n; }
  int level() const { return layout_->l; }
  std::size_t p() const { return layout_->p(); }
  std::size_t q() const { return layout_->q(); }
  const MsymLayout& layout() const { return *layout_; }

  const Eigen::VectorXd& poly_coeffs() const { return alpha_; }
  Eigen::VectorXd number_state() const { return alpha_.cwiseProduct(layout_->number_scale); }
  Eigen::VectorXd moments() const { return alpha_.cwiseProduct(layout_->number_scale.cwiseAbs2()); }

  /// Dense p x p view in the degree-l number-state basis.
  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd A = layout_->assemble(number_state());
    return 0.5 * (A + A.transpose());
  }

  double trace() const { return layout_->trace_vector.dot(number_state()); }

  /// Hilbert-Schmidt inner product tr(A B).
  double inner(const MaxSymMatrix& o) const {
    check_same_shape(o);
    return number_state().dot(o.number_state());
  }

  MaxSymMatrix operator+(const MaxSymMatrix& o) const {
    check_same_shape(o);
    return MaxSymMatrix(layout_, alpha_ + o.alpha_);
  }
  MaxSymMatrix operator-(const MaxSymMatrix& o) const {
    check_same_shape(o);
    return MaxSymMatrix(layout_, alpha_ - o.alpha_);
  }
  MaxSymMatrix operator*(double s) const { return MaxSymMatrix(layout_, alpha_ * s); }

  void check_same_shape(const MaxSymMatrix& o) const {
    if (!layout_ || !o.layout_ || o.n() != n() || o.level() != level())
      throw std::invalid_argument("MaxSymMatrix: shape mismatch");
  }

private:
  MaxSymMatrix(std::shared_ptr<const MsymLayout> lay, Eigen::VectorXd alpha)
      : layout_(std::move(lay)), alpha_(std::move(alpha)) {}

  static void check_size(const MsymLayout& lay, const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (static_cast<std::size_t>(v.size()) != lay.q()) throw std::invalid_argument("MaxSymMatrix: coefficient length mismatch");
  }

  std::shared_ptr<const MsymLayout> layout_;
  Eigen::VectorXd alpha_;
};

/// Z_T: the unique maximally symmetric matrix with <x|^{(x) a} Z_T |x>^{(x) a} = T(x).
inline MaxSymMatrix poly_to_maxsym_matrix(const HomoPoly& T) {
  if (T.degree() % 2 != 0) throw std::invalid_argument("poly_to_maxsym_matrix: degree must be even");
  const int l = T.degree() / 2;
  auto lay = msym_layout(T.n(), l);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lay->q()));
  for (const auto& [e, c] : T.terms()) alpha(static_cast<Eigen::Index>(lay->coeff_basis.position(e))) = c;
  return MaxSymMatrix::from_poly_coeffs(T.n(), l, std::move(alpha));
}

/// Q_M, the inverse of poly_to_maxsym_matrix.
inline HomoPoly matrix_to_poly(const MaxSymMatrix& M) {
  const auto& cat = M.layout().coeff_basis;
  HomoPoly out(M.n(), 2 * M.level());
  const auto& alpha = M.poly_coeffs();
  for (std::size_t k = 0; k < cat.size(); ++k) {
    double c = alpha(static_cast<Eigen::Index>(k));
    if (c != 0.0) out.add(cat[k], c);
  }
  return out;
}

/// tr_1 |i><j| = (1/l) sum_t sqrt(i_t j_t) |i - e_t><j - e_t|, applied to any operator on
/// Sym((R^n)^{(x) l}) written in the number-state basis.
inline Eigen::MatrixXd partial_trace_number_basis(const Eigen::Ref<const Eigen::MatrixXd>& A, int n, int l) {
  if (l < 1) throw std::invalid_argument("partial_trace_number_basis: level must be >= 1");
  BasisCatalog from(n, l), to(n, l - 1);
  if (static_cast<std::size_t>(A.rows()) != from.size()) throw std::invalid_argument("partial_trace_number_basis: shape mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(to.size()), static_cast<Eigen::Index>(to.size()));
  std::vector<std::vector<int>> lowered(from.size(), std::vector<int>(static_cast<std::size_t>(n), -1));
  for (std::size_t a = 0; a < from.size(); ++a) {
    for (int t = 0; t < n; ++t) {
      MultiIndex lower;
      if (from[a].shifted(t, -1, &lower)) lowered[a][static_cast<std::size_t>(t)] = static_cast<int>(to.position(lower));
    }
  }
  for (std::size_t a = 0; a < from.size(); ++a) {
    for (std::size_t b = 0; b < from.size(); ++b) {
      double v = A(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (v == 0.0) continue;
      for (int t = 0; t < n; ++t) {
        int ra = lowered[a][static_cast<std::size_t>(t)], rb = lowered[b][static_cast<std::size_t>(t)];
        if (ra < 0 || rb < 0) continue;
        out(ra, rb) += v * std::sqrt(static_cast<double>(from[a][t]) * from[b][t]) / l;
      }
    }
  }
  return out;
}

namespace detail {

inline MaxSymMatrix trace_out(const MaxSymMatrix& M, int b) {
  Eigen::MatrixXd A = M.matrix();
  int l = M.level();
  for (int s = 0; s < b; ++s, --l) A = partial_trace_number_basis(A, M.n(), l);
  return MaxSymMatrix::from_matrix(M.n(), l, A);
}

}  // namespace detail

/// Trace out b of the l tensor factors, staying in the number-state basis.
inline MaxSymMatrix partial_trace_sym(const MaxSymMatrix& M, int b) {
  if (b < 1 || b >= M.level()) throw std::invalid_argument("partial_trace_sym: need 1 <= b < l");
  return detail::trace_out(M, b);
}

/// Checks Z_{Laplacian T} = d(d-1) tr_1(Z_T), each side computed independently.
inline bool laplacian_via_trace_check(const HomoPoly& T, double tol = 1e-10) {
  const int d = T.degree();
  if (d < 2 || d % 2 != 0) throw std::invalid_argument("laplacian_via_trace_check: degree must be even and >= 2");
  MaxSymMatrix lhs = poly_to_maxsym_matrix(laplacian(T));
  MaxSymMatrix rhs = detail::trace_out(poly_to_maxsym_matrix(T), 1) * (static_cast<double>(d) * (d - 1));
  const double scale = std::max(1.0, lhs.poly_coeffs().cwiseAbs().maxCoeff());
  return (lhs.poly_coeffs() - rhs.poly_coeffs()).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace sphereopt

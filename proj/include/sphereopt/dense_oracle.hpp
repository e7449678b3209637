#pragma once

// Brute-force constructions on the full product space (R^n)^{(x) l}.
// Only meant for tiny instances in tests.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "multi_index.hpp"

namespace sphereopt::dense {

inline constexpr long kMaxProductDim = 10000;

inline long product_dim(int n, int l) {
  long dim = 1;
  for (int s = 0; s < l; ++s) {
    dim *= n;
    if (dim > kMaxProductDim) throw std::length_error("dense oracle: n^l exceeds 1e4");
  }
  return dim;
}

/// Base-n digits of a product-basis position, most significant factor first.
inline std::vector<int> digits(long pos, int n, int l) {
  std::vector<int> d(static_cast<std::size_t>(l));
  for (int s = l - 1; s >= 0; --s) {
    d[static_cast<std::size_t>(s)] = static_cast<int>(pos % n);
    pos /= n;
  }
  return d;
}

inline long position(const std::vector<int>& d, int n) {
  long pos = 0;
  for (int v : d) pos = pos * n + v;
  return pos;
}

/// Projector (1/l!) sum_pi pi onto the symmetric subspace.
inline Eigen::MatrixXd dense_symmetrizer(int n, int l) {
  const long dim = product_dim(n, l);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(dim, dim);
  std::vector<int> perm(static_cast<std::size_t>(l));
  double count = 0;
  std::iota(perm.begin(), perm.end(), 0);
  do {
    count += 1;
    for (long col = 0; col < dim; ++col) {
      auto d = digits(col, n, l);
      std::vector<int> pd(d.size());
      for (std::size_t s = 0; s < d.size(); ++s) pd[s] = d[static_cast<std::size_t>(perm[s])];
      P(position(pd, n), col) += 1.0;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return P / count;
}

/// The unit vector |i> in the product basis.
inline Eigen::VectorXd dense_number_state(const MultiIndex& i) {
  const int n = i.size();
  const int l = i.degree();
  const long dim = product_dim(n, l);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  const double amp = std::sqrt(std::exp(i.log_factorial() - std::lgamma(l + 1.0)));
  for (long pos = 0; pos < dim; ++pos) {
    auto d = digits(pos, n, l);
    std::vector<int> counts(static_cast<std::size_t>(n), 0);
    for (int v_t : d) ++counts[static_cast<std::size_t>(v_t)];
    if (counts == i.exponents()) v(pos) = amp;
  }
  return v;
}

/// |x>^{(x) l} in the product basis.
inline Eigen::VectorXd dense_product_state(const Eigen::VectorXd& x, int l) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(1);
  for (int s = 0; s < l; ++s) {
    Eigen::VectorXd next(v.size() * x.size());
    for (Eigen::Index a = 0; a < v.size(); ++a)
      for (Eigen::Index b = 0; b < x.size(); ++b) next(a * x.size() + b) = v(a) * x(b);
    v = std::move(next);
  }
  return v;
}

/// Columns are the number states of degree l in catalog order.
inline Eigen::MatrixXd number_state_isometry(int n, int l) {
  BasisCatalog cat(n, l);
  Eigen::MatrixXd V(product_dim(n, l), static_cast<Eigen::Index>(cat.size()));
  for (std::size_t k = 0; k < cat.size(); ++k) V.col(static_cast<Eigen::Index>(k)) = dense_number_state(cat[k]);
  return V;
}

/// Trace out the first tensor factor of an operator on (R^n)^{(x) l}.
inline Eigen::MatrixXd partial_trace_first(const Eigen::MatrixXd& A, int n, int l) {
  const long inner = product_dim(n, l - 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(inner, inner);
  for (int t = 0; t < n; ++t) out += A.block(t * inner, t * inner, inner, inner);
  return out;
}

}  // namespace sphereopt::dense

#pragma once

// Multi-index combinatorics and the number-state basis of the symmetric
// subspace Sym((R^n)^{(x) l}).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sphereopt {

/// Exponent vector of a monomial x^i = x_1^{i_1} ... x_n^{i_n}.
class MultiIndex {
public:
  MultiIndex() = default;

  explicit MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
    for (int e : exps_) {
      if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
      degree_ += e;
    }
  }

  MultiIndex(std::initializer_list<int> exponents) : MultiIndex(std::vector<int>(exponents)) {}

  static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(static_cast<std::size_t>(n), 0)); }

  /// e_t scaled by `power`.
  static MultiIndex unit(int n, int t, int power = 1) {
    std::vector<int> e(static_cast<std::size_t>(n), 0);
    e.at(static_cast<std::size_t>(t)) = power;
    return MultiIndex(std::move(e));
  }

  int size() const { return static_cast<int>(exps_.size()); }
  int degree() const { return degree_; }
  int operator[](int t) const { return exps_[static_cast<std::size_t>(t)]; }
  const std::vector<int>& exponents() const { return exps_; }

  bool all_even() const {
    for (int e : exps_)
      if (e % 2 != 0) return false;
    return true;
  }

  /// log(i!) = sum_t log(i_t!)
  double log_factorial() const {
    double s = 0.0;
    for (int e : exps_) s += std::lgamma(static_cast<double>(e) + 1.0);
    return s;
  }

  MultiIndex operator+(const MultiIndex& o) const {
    check_same_size(o);
    std::vector<int> e(exps_);
    for (std::size_t t = 0; t < e.size(); ++t) e[t] += o.exps_[t];
    return MultiIndex(std::move(e));
  }

  /// Componentwise difference; throws if any entry would become negative.
  MultiIndex operator-(const MultiIndex& o) const {
    check_same_size(o);
    std::vector<int> e(exps_);
    for (std::size_t t = 0; t < e.size(); ++t) e[t] -= o.exps_[t];
    return MultiIndex(std::move(e));
  }

  /// Shift exponent t by delta; returns false (and leaves *out untouched) if it would go negative.
  bool shifted(int t, int delta, MultiIndex* out) const {
    int v = exps_[static_cast<std::size_t>(t)] + delta;
    if (v < 0) return false;
    std::vector<int> e(exps_);
    e[static_cast<std::size_t>(t)] = v;
    *out = MultiIndex(std::move(e));
    return true;
  }

  MultiIndex halved() const {
    std::vector<int> e(exps_);
    for (int& v : e) {
      if (v % 2 != 0) throw std::invalid_argument("MultiIndex::halved: odd exponent");
      v /= 2;
    }
    return MultiIndex(std::move(e));
  }

  /// Prepend a new leading variable with the given exponent.
  MultiIndex prepend(int exponent) const {
    std::vector<int> e;
    e.reserve(exps_.size() + 1);
    e.push_back(exponent);
    e.insert(e.end(), exps_.begin(), exps_.end());
    return MultiIndex(std::move(e));
  }

  bool operator==(const MultiIndex& o) const { return exps_ == o.exps_; }
  bool operator!=(const MultiIndex& o) const { return !(*this == o); }

  /// Graded lexicographic order: lower degree first, then larger leading exponents first,
  /// so that degree 2 in two variables runs (2,0) < (1,1) < (0,2).
  bool operator<(const MultiIndex& o) const {
    if (degree_ != o.degree_) return degree_ < o.degree_;
    if (exps_.size() != o.exps_.size()) return exps_.size() < o.exps_.size();
    return exps_ > o.exps_;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t t = 0; t < exps_.size(); ++t) {
      if (t) s += ",";
      s += std::to_string(exps_[t]);
    }
    return s + ")";
  }

private:
  void check_same_size(const MultiIndex& o) const {
    if (o.exps_.size() != exps_.size()) throw std::invalid_argument("MultiIndex: size mismatch");
  }

  std::vector<int> exps_;
  int degree_ = 0;
};

namespace detail {

inline void enumerate_rec(int n, int t, int remaining, std::vector<int>& cur, std::vector<MultiIndex>& out) {
  if (t == n - 1) {
    cur[static_cast<std::size_t>(t)] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[static_cast<std::size_t>(t)] = e;
    enumerate_rec(n, t + 1, remaining - e, cur, out);
  }
}

inline double log_binomial(double top, double bottom) {
  return std::lgamma(top + 1.0) - std::lgamma(bottom + 1.0) - std::lgamma(top - bottom + 1.0);
}

}  // namespace detail

/// Every multi-index with |i| = d in n variables, graded-lex order.
inline std::vector<MultiIndex> enumerate_multiindices(int n, int d) {
  if (n < 1) throw std::invalid_argument("enumerate_multiindices: n must be >= 1");
  if (d < 0) throw std::invalid_argument("enumerate_multiindices: negative degree");
  std::vector<MultiIndex> out;
  std::vector<int> cur(static_cast<std::size_t>(n), 0);
  detail::enumerate_rec(n, 0, d, cur, out);
  return out;
}

/// Binomial coefficient with explicit overflow reporting.
inline std::uint64_t checked_binomial(std::uint64_t top, std::uint64_t bottom) {
  if (bottom > top) return 0;
  bottom = std::min(bottom, top - bottom);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= bottom; ++i) {
    // r holds C(top - bottom + i - 1, i - 1); the next step is an exact division.
    r = r * (top - bottom + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max())
      throw std::overflow_error("binomial coefficient overflows 64 bits");
  }
  return static_cast<std::uint64_t>(r);
}

/// Dimension of Sym((R^n)^{(x) l}) = C(l + n - 1, l).
inline std::uint64_t sym_dimension(int n, int l) {
  if (n < 1) throw std::invalid_argument("sym_dimension: n must be >= 1");
  if (l < 0) throw std::invalid_argument("sym_dimension: negative level");
  return checked_binomial(static_cast<std::uint64_t>(l) + static_cast<std::uint64_t>(n) - 1,
                          static_cast<std::uint64_t>(l));
}

/// Ordered list of all degree-l multi-indices with position lookup.
class BasisCatalog {
public:
  BasisCatalog(int n, int degree) : n_(n), degree_(degree), indices_(enumerate_multiindices(n, degree)) {
    for (std::size_t k = 0; k < indices_.size(); ++k) lookup_.emplace(indices_[k], k);
  }

  int n() const { return n_; }
  int degree() const { return degree_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t k) const { return indices_[k]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  std::size_t position(const MultiIndex& i) const {
    auto it = lookup_.find(i);
    if (it == lookup_.end()) throw std::out_of_range("BasisCatalog: index " + i.to_string() + " not in catalog");
    return it->second;
  }

  bool contains(const MultiIndex& i) const { return lookup_.count(i) != 0; }

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

private:
  int n_;
  int degree_;
  std::vector<MultiIndex> indices_;
  std::map<MultiIndex, std::size_t> lookup_;
};

/// Reshape coefficient <i (x) j | k> of the degree-2l number state |k> against
/// the product of degree-l number states |i>, |j>.
inline double number_state_overlap(const MultiIndex& i, const MultiIndex& j, const MultiIndex& k) {
  if (i.degree() != j.degree() || k.degree() != 2 * i.degree())
    throw std::invalid_argument("number_state_overlap: degree mismatch");
  if (i.size() != j.size() || i.size() != k.size())
    throw std::invalid_argument("number_state_overlap: variable count mismatch");
  double log_num = 0.0;
  for (int t = 0; t < k.size(); ++t) {
    if (i[t] + j[t] != k[t]) return 0.0;
    log_num += detail::log_binomial(k[t], i[t]);
  }
  const int l = i.degree();
  return std::sqrt(std::exp(log_num - detail::log_binomial(2.0 * l, l)));
}

}  // namespace sphereopt

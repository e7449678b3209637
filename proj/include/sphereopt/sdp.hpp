#pragma once

// Level-l relaxation of max_{|x|=1} T(x):
//
//   maximize  tr(Z_{T'} M)  over  M in MSym,  M >= 0,  tr M = 1,      T' = T r^{2(l-a)}
//   minimize  t             over  t, Zbar with Pi|Zbar> = 0,  t I - Z_{T'} + Zbar >= 0.
//
// M is parametrized by its number-state coordinates y (M = sum_k y_k B_k with B_k an
// orthonormal basis of MSym), so the MSym constraint holds by construction and the
// program is in inequality form with q = dim MSym unknowns.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "harmonics.hpp"
#include "max_sym_matrix.hpp"
#include "polynomial.hpp"

namespace sphereopt {

/// Raised when a problem exceeds the configured size cap.
class ResourceLimitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised by callers that require an optimal solve when the solver stops short.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

constexpr std::size_t kDefaultMaxP = 512;

/// p-dimension cap: SPHEREOPT_MAX_P if set to a positive integer, else 512.
inline std::size_t configured_max_p() {
  const char* env = std::getenv("SPHEREOPT_MAX_P");
  if (env == nullptr || *env == '\0') return kDefaultMaxP;
  char* end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || v == 0) throw std::invalid_argument(std::string("SPHEREOPT_MAX_P is not a positive integer: ") + env);
  return static_cast<std::size_t>(v);
}

struct SdpProblem {
  int n = 0;
  int a = 0;
  int level = 0;
  HomoPoly T;
  HomoPoly T_prime;
  Eigen::VectorXd objective;  ///< c_k = tr(Z_{T'} B_k)
  Eigen::VectorXd trace;      ///< tau_k = tr(B_k)
  std::shared_ptr<const MsymLayout> layout;

  std::size_t p() const { return layout->p(); }
  std::size_t q() const { return layout->q(); }

  /// M(y) as a MaxSymMatrix.
  MaxSymMatrix matrix_of(const Eigen::Ref<const Eigen::VectorXd>& y) const { return MaxSymMatrix::from_number_state(n, level, y); }

  /// Z_{T'} as a dense p x p matrix.
  Eigen::MatrixXd objective_matrix() const { return layout->assemble(objective); }
};

inline SdpProblem build_relaxation(const HomoPoly& T, int level, std::size_t max_p = configured_max_p()) {
  if (T.is_zero()) throw std::invalid_argument("build_relaxation: zero polynomial");
  if (T.degree() % 2 != 0) throw std::invalid_argument("build_relaxation: degree must be even");
  const int a = T.degree() / 2;
  if (level < a) throw std::invalid_argument("build_relaxation: level must be >= d/2");
  const std::uint64_t p = sym_dimension(T.n(), level);
  if (p > max_p)
    throw ResourceLimitError("relaxation needs p = " + std::to_string(p) + " > cap " + std::to_string(max_p) +
                             " (raise SPHEREOPT_MAX_P to allow)");
  SdpProblem prob;
  prob.n = T.n();
  prob.a = a;
  prob.level = level;
  prob.T = T;
  prob.T_prime = multiply_r2(T, level - a);
  MaxSymMatrix Z = poly_to_maxsym_matrix(prob.T_prime);
  prob.layout = msym_layout(T.n(), level);
  prob.objective = Z.number_state();
  prob.trace = prob.layout->trace_vector;
  return prob;
}

enum class SdpStatus { optimal, max_iterations, numerical_failure };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::max_iterations: return "max_iterations";
    case SdpStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

struct SdpSolution {
  double nu_ell = 0.0;
  MaxSymMatrix M_star;
  double t_star = 0.0;
  Eigen::MatrixXd Zbar_star;
  double duality_gap = 0.0;
  int iterations = 0;
  SdpStatus status = SdpStatus::numerical_failure;
  Eigen::MatrixXd Z_prime;  ///< Z_{T'} (p x p), kept so the certificate needs no problem reference
  int n = 0;
  int level = 0;

  /// t* I - Z_{T'} + Zbar*
  Eigen::MatrixXd dual_slack() const {
    Eigen::MatrixXd S = Zbar_star - Z_prime;
    S.diagonal().array() += t_star;
    return S;
  }
};

struct SolverOptions {
  int max_iterations = 100;
  double step_fraction = 0.98;
  int max_cg_iterations = 50;
};

/// Interface for plugging in an alternative SDP backend.
class SdpSolver {
public:
  virtual ~SdpSolver() = default;
  virtual SdpSolution solve(const SdpProblem& problem, double tol) const = 0;
};

namespace detail {

/// Moments of the uniform sphere measure in number-state coordinates.
inline Eigen::VectorXd uniform_measure_point(const SdpProblem& prob) {
  const auto& cat = prob.layout->coeff_basis;
  Eigen::VectorXd y(static_cast<Eigen::Index>(cat.size()));
  for (std::size_t k = 0; k < cat.size(); ++k) {
    Eigen::Index kk = static_cast<Eigen::Index>(k);
    y(kk) = sphere_monomial_moment(cat[k]) / prob.layout->number_scale(kk);
  }
  return y;
}

/// Largest alpha with Lambda + alpha D >= 0 for diagonal Lambda > 0.
inline double max_step(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& D) {
  Eigen::VectorXd isq = lambda.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd E = isq.asDiagonal() * D * isq.asDiagonal();
  double emin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (E + E.transpose()), Eigen::EigenvaluesOnly).eigenvalues()(0);
  return emin < 0 ? -1.0 / emin : std::numeric_limits<double>::infinity();
}

/// Schur complement H_{kk'} = tr(B_k W B_k' W) for symmetric W.
///
/// With B_k(i,j) = c0 sqrt(k!) D_i D_j on i + j = k (D_i = 1/sqrt(i!)), every entry is a
/// sum over ordered pairs (i,j) -> k, (i',j') -> k' of Wt(j,i') Wt(i,j') with Wt = D W D.
/// Pairs are grouped by k so only the k' <= k triangle is visited.
class SchurAssembler {
public:
  explicit SchurAssembler(const MsymLayout& lay) : p_(static_cast<int>(lay.p())), q_(static_cast<int>(lay.q())) {
    const auto& basis = lay.basis;
    d_.resize(p_);
    for (int i = 0; i < p_; ++i) d_(i) = std::exp(-0.5 * basis[static_cast<std::size_t>(i)].log_factorial());
    const double log_c0sq = 2 * std::lgamma(lay.l + 1.0) - std::lgamma(2.0 * lay.l + 1);
    s_.resize(q_);
    for (int k = 0; k < q_; ++k)
      s_(k) = std::exp(0.5 * (log_c0sq + lay.coeff_basis[static_cast<std::size_t>(k)].log_factorial()));
    std::vector<std::vector<std::pair<int, int>>> groups(static_cast<std::size_t>(q_));
    for (int i = 0; i < p_; ++i)
      for (int j = i; j < p_; ++j) groups[static_cast<std::size_t>(lay.pair_coeff[static_cast<std::size_t>(i * p_ + j)])].emplace_back(i, j);
    start_.push_back(0);
    for (const auto& g : groups) {
      for (auto [i, j] : g) {
        first_.push_back(i);
        second_.push_back(j);
      }
      start_.push_back(static_cast<int>(first_.size()));
    }
  }

  Eigen::MatrixXd assemble(const Eigen::MatrixXd& W) const {
    Eigen::MatrixXd Wt = d_.asDiagonal() * W * d_.asDiagonal();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(q_, q_);
    for (int k = 0; k < q_; ++k) {
      for (int e = start_[k]; e < start_[k + 1]; ++e) {
        const int a = first_[static_cast<std::size_t>(e)], b = second_[static_cast<std::size_t>(e)];
        const double* wa = Wt.col(a).data();
        const double* wb = Wt.col(b).data();
        const double w = a == b ? 1.0 : 2.0;
        for (int kp = 0; kp <= k; ++kp) {
          double acc = 0.0;
          for (int f = start_[kp]; f < start_[kp + 1]; ++f) {
            const int c = first_[static_cast<std::size_t>(f)], d = second_[static_cast<std::size_t>(f)];
            acc += c == d ? wb[c] * wa[c] : wb[c] * wa[d] + wb[d] * wa[c];
          }
          H(kp, k) += w * acc;
        }
      }
    }
    for (int k = 0; k < q_; ++k)
      for (int kp = 0; kp <= k; ++kp) {
        H(kp, k) *= s_(k) * s_(kp);
        H(k, kp) = H(kp, k);
      }
    return H;
  }

private:
  int p_, q_;
  Eigen::VectorXd d_, s_;
  std::vector<int> first_, second_, start_;
};

}  // namespace detail

/// The interior-point starting dual point tbar I - Z_{T'} (Zbar = 0).
inline double initial_dual_t(const SdpProblem& prob) {
  Eigen::MatrixXd Z = prob.objective_matrix();
  Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (Z + Z.transpose()), Eigen::EigenvaluesOnly).eigenvalues();
  return ev(ev.size() - 1) + std::max(1.0, ev(ev.size() - 1) - ev(0));
}

/// Dense primal-dual path following with Nesterov-Todd scaling and Mehrotra
/// predictor-corrector steps.
class InteriorPointSolver : public SdpSolver {
public:
  explicit InteriorPointSolver(SolverOptions opt = {}) : opt_(opt) {}

  SdpSolution solve(const SdpProblem& prob, double tol) const override {
    if (!(tol >= 1e-10 && tol <= 1e-2)) throw std::invalid_argument("solve_sdp: tol must lie in [1e-10, 1e-2]");
    const MsymLayout& lay = *prob.layout;
    const Eigen::Index p = static_cast<Eigen::Index>(lay.p());
    const Eigen::VectorXd& c = prob.objective;
    const Eigen::VectorXd& tau = prob.trace;
    const Eigen::MatrixXd Z = prob.objective_matrix();
    const double cscale = std::max(1.0, c.lpNorm<Eigen::Infinity>());
    detail::SchurAssembler schur(lay);

    Eigen::VectorXd y = detail::uniform_measure_point(prob);
    double t = initial_dual_t(prob);
    Eigen::MatrixXd S = -Z;
    S.diagonal().array() += t;

    SdpSolution sol;
    sol.n = prob.n;
    sol.level = prob.level;
    sol.Z_prime = Z;
    sol.status = SdpStatus::max_iterations;

    auto finish = [&](SdpStatus status, int iters) {
      sol.status = status;
      sol.iterations = iters;
      sol.M_star = prob.matrix_of(y);
      sol.nu_ell = c.dot(y);
      sol.t_star = t;
      sol.duality_gap = std::abs(sol.nu_ell - t);
      sol.Zbar_star = S + Z;
      sol.Zbar_star.diagonal().array() -= t;
      sol.Zbar_star = 0.5 * (sol.Zbar_star + sol.Zbar_star.transpose()).eval();
      return sol;
    };

    for (int it = 0; it < opt_.max_iterations; ++it) {
      Eigen::MatrixXd X = lay.assemble(y);
      X = 0.5 * (X + X.transpose()).eval();
      S = 0.5 * (S + S.transpose()).eval();
      const Eigen::VectorXd rd = -c - lay.project(S) + t * tau;
      const double rp = 1.0 - tau.dot(y);
      const double pobj = c.dot(y);
      if (std::abs(t - pobj) <= tol * std::max(1.0, std::abs(pobj)) && rd.lpNorm<Eigen::Infinity>() <= tol * cscale &&
          std::abs(rp) <= tol)
        return finish(SdpStatus::optimal, it);

      // Nesterov-Todd scaling: Ginv X Ginv^T = Ginv^{-T} S Ginv^{-1} = diag(lambda).
      Eigen::LLT<Eigen::MatrixXd> lx(X), ls(S);
      if (lx.info() != Eigen::Success || ls.info() != Eigen::Success) return finish(SdpStatus::numerical_failure, it);
      Eigen::MatrixXd L1 = lx.matrixL(), L2 = ls.matrixL();
      // L2^T L1 = U diag(lambda) V^T gives Ginv = diag(lambda)^{-1/2} U^T L2^T without inverting a factor.
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(L2.transpose() * L1, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Eigen::VectorXd lambda = svd.singularValues();
      if (lambda.minCoeff() <= 0) return finish(SdpStatus::numerical_failure, it);
      const Eigen::MatrixXd Ginv = lambda.cwiseSqrt().cwiseInverse().asDiagonal() * svd.matrixU().transpose() * L2.transpose();
      const Eigen::MatrixXd G = L1 * svd.matrixV() * lambda.cwiseSqrt().cwiseInverse().asDiagonal();
      const Eigen::MatrixXd Winv = Ginv.transpose() * Ginv;

      // Eliminate tau . dy = r with the Householder reflector Q sending tau to a multiple of e_0;
      // the remaining columns of Q span tau^perp and carry the reduced Schur system.
      const Eigen::MatrixXd H = schur.assemble(Winv);
      const Eigen::Index q = H.rows();
      Eigen::VectorXd v = tau;
      v(0) += (tau(0) >= 0 ? 1.0 : -1.0) * tau.norm();
      const double beta = 2.0 / v.squaredNorm();
      const double tau_sq = tau.squaredNorm();
      const Eigen::VectorXd u = H * v;
      Eigen::MatrixXd K = H;
      K.noalias() -= beta * v * u.transpose();
      K.noalias() -= beta * u * v.transpose();
      K.noalias() += (beta * beta * v.dot(u)) * v * v.transpose();
      Eigen::MatrixXd Kr = K.bottomRightCorner(q - 1, q - 1);
      Eigen::LLT<Eigen::MatrixXd> hchol(Kr);
      for (int reg = 0; hchol.info() != Eigen::Success && reg < 3; ++reg) {
        Kr.diagonal().array() += std::pow(10.0, -12 + 2 * reg) * Kr.diagonal().mean();
        hchol.compute(Kr);
      }
      if (hchol.info() != Eigen::Success) return finish(SdpStatus::numerical_failure, it);
      auto reflect = [&](Eigen::VectorXd x) {
        x -= (beta * v.dot(x)) * v;
        return x;
      };
      // Exact Schur operator dy -> Pi(W^{-1} M(dy) W^{-1}), applied through the scaling.
      auto schur_apply = [&](const Eigen::VectorXd& dy) {
        Eigen::MatrixXd scaled = Ginv * lay.assemble(dy) * Ginv.transpose();
        return lay.project(Ginv.transpose() * scaled * Ginv);
      };
      auto reduced_apply = [&](const Eigen::VectorXd& w) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(q);
        full.tail(q - 1) = w;
        return Eigen::VectorXd(reflect(schur_apply(reflect(full))).tail(q - 1));
      };

      const double mu = lambda.squaredNorm() / static_cast<double>(p);
      Eigen::MatrixXd lsum = lambda.replicate(1, p) + lambda.transpose().replicate(p, 1);

      struct Direction {
        Eigen::VectorXd dy;
        double dt;
        Eigen::MatrixXd dXs, dSs;
      };
      // Solves H dy + dt tau = g, tau . dy = rp by conjugate gradients on tau^perp, preconditioned
      // with the Cholesky factor of the assembled reduced matrix.
      auto direction = [&](const Eigen::MatrixXd& rhs) {
        Eigen::MatrixXd Rt = 2.0 * rhs.cwiseQuotient(lsum);
        Eigen::VectorXd g = lay.project(Ginv.transpose() * Rt * Ginv) - rd;
        Eigen::VectorXd dy_p = tau * (rp / tau_sq);
        Eigen::VectorXd b = reflect(g - schur_apply(dy_p)).tail(q - 1);
        Eigen::VectorXd w = Eigen::VectorXd::Zero(q - 1), r = b;
        Eigen::VectorXd z = hchol.solve(r), dir_w = z;
        double rz = r.dot(z);
        const double bnorm = b.norm();
        for (int k = 0; k < opt_.max_cg_iterations && r.norm() > 1e-14 * bnorm; ++k) {
          Eigen::VectorXd Ad = reduced_apply(dir_w);
          double curv = dir_w.dot(Ad);
          if (!(curv > 0)) break;
          double alpha = rz / curv;
          w += alpha * dir_w;
          r -= alpha * Ad;
          z = hchol.solve(r);
          double rz_next = r.dot(z);
          dir_w = z + (rz_next / rz) * dir_w;
          rz = rz_next;
        }
        Eigen::VectorXd full = Eigen::VectorXd::Zero(q);
        full.tail(q - 1) = w;
        Direction dir;
        dir.dy = dy_p + reflect(full);
        dir.dt = tau.dot(g - schur_apply(dir.dy)) / tau_sq;
        dir.dXs = Ginv * lay.assemble(dir.dy) * Ginv.transpose();
        dir.dXs = 0.5 * (dir.dXs + dir.dXs.transpose()).eval();
        dir.dSs = Rt - dir.dXs;
        return dir;
      };

      Eigen::MatrixXd Lam2 = lambda.cwiseAbs2().asDiagonal();
      Direction aff = direction(-Lam2);
      double ap = std::min(1.0, detail::max_step(lambda, aff.dXs));
      double ad = std::min(1.0, detail::max_step(lambda, aff.dSs));
      Eigen::MatrixXd Xa = lambda.asDiagonal().toDenseMatrix() + ap * aff.dXs;
      Eigen::MatrixXd Sa = lambda.asDiagonal().toDenseMatrix() + ad * aff.dSs;
      double mu_aff = Xa.cwiseProduct(Sa).sum() / static_cast<double>(p);
      double sigma = std::clamp(std::pow(mu_aff / mu, 3), 0.0, 1.0);

      Eigen::MatrixXd cross = aff.dXs * aff.dSs;
      Eigen::MatrixXd rhs = -Lam2 - 0.5 * (cross + cross.transpose());
      rhs.diagonal().array() += sigma * mu;
      Direction cor = direction(rhs);
      // Enforce the linearized dual equation exactly; the Schur solve alone loses it as W degenerates.
      Eigen::MatrixXd dS = Ginv.transpose() * cor.dSs * Ginv;
      dS += lay.assemble(rd + cor.dt * tau - lay.project(dS));
      dS = 0.5 * (dS + dS.transpose()).eval();
      ap = std::min(1.0, opt_.step_fraction * detail::max_step(lambda, cor.dXs));
      ad = std::min(1.0, opt_.step_fraction * detail::max_step(lambda, G.transpose() * dS * G));

      y += ap * cor.dy;
      S += ad * dS;
      t += ad * cor.dt;
    }
    return finish(SdpStatus::max_iterations, opt_.max_iterations);
  }

private:
  SolverOptions opt_;
};

inline SdpSolution solve_sdp(const SdpProblem& prob, double tol = 1e-8, const SdpSolver& solver = InteriorPointSolver()) {
  return solver.solve(prob, tol);
}

struct SosTerm {
  double weight;  ///< lambda_i >= 0
  HomoPoly poly;  ///< degree-l polynomial T_i
};

/// t* - T(x) = sum_i lambda_i T_i(x)^2 on the sphere, read off from the dual slack spectrum.
inline std::vector<SosTerm> extract_sos_certificate(const SdpSolution& sol, double tol = 1e-8) {
  if (sol.status != SdpStatus::optimal) throw std::invalid_argument("extract_sos_certificate: solution is not optimal");
  Eigen::MatrixXd S = sol.dual_slack();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const double norm_inf = S.cwiseAbs().rowwise().sum().maxCoeff();
  const double thresh = std::max(tol, 1e-9) * norm_inf;
  BasisCatalog basis(sol.n, sol.level);
  std::vector<SosTerm> out;
  for (Eigen::Index i = es.eigenvalues().size(); i-- > 0;) {
    double lam = es.eigenvalues()(i);
    if (lam <= thresh) continue;
    out.push_back({lam, vector_to_poly(es.eigenvectors().col(i), basis)});
  }
  return out;
}

}  // namespace sphereopt

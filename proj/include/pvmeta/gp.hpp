#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "pvmeta/errors.hpp"
#include "pvmeta/solar_model.hpp"

namespace pvmeta {

// Smallest azimuth separation on the compass circle, in [0, 180].
inline double circular_azimuth_difference(double a_deg, double b_deg) {
  return std::fabs(std::remainder(a_deg - b_deg, 360.0));
}

struct KernelSpec {
  double ls_az = 30.0;    // degrees; correlation length along azimuth
  double ls_tilt = 10.0;  // degrees; correlation length along tilt
  double jitter = 1e-8;   // diagonal regularizer, escalated on demand
  bool circular_azimuth = true;

  // Literal RBF on raw degree coordinates: exp(-|x - y|^2), no wraparound.
  static KernelSpec unit() { return {1.0, 1.0, 1e-8, false}; }
};

// RBF correlation in (0, 1]; exactly 1 at identical inputs.
inline double kernel(const SurfaceOrientation& x, const SurfaceOrientation& y,
                     const KernelSpec& spec) {
  const double da = spec.circular_azimuth
                        ? circular_azimuth_difference(x.azimuth_deg, y.azimuth_deg)
                        : x.azimuth_deg - y.azimuth_deg;
  const double db = x.tilt_deg - y.tilt_deg;
  const double ua = da / spec.ls_az;
  const double ub = db / spec.ls_tilt;
  return std::exp(-(ua * ua + ub * ub));
}

struct Posterior {
  double mean = 0;
  double variance = 1;
};

inline constexpr double kMaxJitter = 1e-4;

// Noiseless GP with zero prior mean and unit prior variance over the
// orientation plane. Value semantics: update() returns a new state, so a
// caller can hold arbitrary snapshots. The Cholesky factor of K + jitter*I is
// extended one row per update; if the pivot collapses, the factorization is
// rebuilt from scratch with doubled jitter (revision() then changes, telling
// incremental consumers to resynchronize).
class GpState {
 public:
  GpState() = default;
  explicit GpState(const KernelSpec& spec) : spec_(spec), jitter_(spec.jitter) {}

  size_t size() const { return points_.size(); }
  const std::vector<SurfaceOrientation>& points() const { return points_; }
  const std::vector<double>& observations() const { return obs_; }
  const KernelSpec& kernel_spec() const { return spec_; }
  double effective_jitter() const { return jitter_; }
  std::uint64_t revision() const { return revision_; }
  // Lower-triangular factor; row t-1 holds [l12^T, l22] after a plain append.
  const Eigen::MatrixXd& chol_factor() const { return L_; }

  GpState update(const SurfaceOrientation& p, double obs) const {
    GpState next(*this);
    next.points_.push_back(p);
    next.obs_.push_back(obs);
    const Eigen::Index t = static_cast<Eigen::Index>(next.points_.size());
    if (t == 1) {
      next.L_.resize(1, 1);
      next.L_(0, 0) = std::sqrt(1.0 + next.jitter_);
    } else {
      Eigen::VectorXd k_new(t - 1);
      for (Eigen::Index i = 0; i < t - 1; ++i)
        k_new[i] = kernel(next.points_[static_cast<size_t>(i)], p, spec_);
      Eigen::VectorXd l12 = L_.triangularView<Eigen::Lower>().solve(k_new);
      const double l22_sq = (1.0 + next.jitter_) - l12.squaredNorm();
      if (l22_sq > 1e-20) {
        next.L_.conservativeResize(t, t);
        next.L_.row(t - 1).head(t - 1) = l12.transpose();
        next.L_.col(t - 1).head(t - 1).setZero();
        next.L_(t - 1, t - 1) = std::sqrt(l22_sq);
      } else {
        next.refactorize();
      }
    }
    next.recompute_alpha();
    return next;
  }

  Posterior posterior(const SurfaceOrientation& q) const {
    if (points_.empty()) return {0.0, 1.0};  // the prior, exactly
    const Eigen::Index t = static_cast<Eigen::Index>(points_.size());
    Eigen::VectorXd k_q(t);
    for (Eigen::Index i = 0; i < t; ++i)
      k_q[i] = kernel(points_[static_cast<size_t>(i)], q, spec_);
    Posterior p;
    p.mean = k_q.dot(alpha_);
    const Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(k_q);
    p.variance = std::max(0.0, 1.0 - v.squaredNorm());
    return p;
  }

  // Batch posterior over many query points; one triangular solve per block
  // instead of per point.
  void posterior_batch(const std::vector<SurfaceOrientation>& queries,
                       std::vector<double>& means, std::vector<double>& variances) const {
    const size_t m = queries.size();
    means.assign(m, 0.0);
    variances.assign(m, 1.0);
    if (points_.empty() || m == 0) return;
    const Eigen::Index t = static_cast<Eigen::Index>(points_.size());
    Eigen::MatrixXd K_cross(t, static_cast<Eigen::Index>(m));
    for (size_t j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < t; ++i)
        K_cross(i, static_cast<Eigen::Index>(j)) =
            kernel(points_[static_cast<size_t>(i)], queries[j], spec_);
    Eigen::MatrixXd V = L_.triangularView<Eigen::Lower>().solve(K_cross);
    Eigen::VectorXd w = L_.triangularView<Eigen::Lower>().solve(
        Eigen::Map<const Eigen::VectorXd>(obs_.data(), t));
    Eigen::VectorXd mu = V.transpose() * w;
    for (size_t j = 0; j < m; ++j) {
      means[j] = mu[static_cast<Eigen::Index>(j)];
      variances[j] =
          std::max(0.0, 1.0 - V.col(static_cast<Eigen::Index>(j)).squaredNorm());
    }
  }

 private:
  // Full rebuild of the factor, doubling the jitter until the matrix factors.
  void refactorize() {
    const Eigen::Index t = static_cast<Eigen::Index>(points_.size());
    Eigen::MatrixXd K(t, t);
    for (Eigen::Index i = 0; i < t; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v =
            kernel(points_[static_cast<size_t>(i)], points_[static_cast<size_t>(j)], spec_);
        K(i, j) = v;
        K(j, i) = v;
      }
    }
    double j = jitter_;
    while (true) {
      Eigen::MatrixXd A = K;
      A.diagonal().array() += j;
      Eigen::LLT<Eigen::MatrixXd> llt(A);
      if (llt.info() == Eigen::Success) {
        L_ = llt.matrixL();
        jitter_ = j;
        ++revision_;
        return;
      }
      j *= 2.0;
      if (j > kMaxJitter)
        throw FactorizationFailure(
            "kernel matrix not factorizable even at jitter " + std::to_string(kMaxJitter));
    }
  }

  void recompute_alpha() {
    const Eigen::Index t = static_cast<Eigen::Index>(points_.size());
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(obs_.data(), t);
    Eigen::VectorXd w = L_.triangularView<Eigen::Lower>().solve(y);
    alpha_ = L_.transpose().triangularView<Eigen::Upper>().solve(w);
  }

  KernelSpec spec_{};
  double jitter_ = KernelSpec{}.jitter;
  std::uint64_t revision_ = 0;
  std::vector<SurfaceOrientation> points_;
  std::vector<double> obs_;
  Eigen::MatrixXd L_;
  Eigen::VectorXd alpha_;  // (K + jitter*I)^{-1} obs
};

}  // namespace pvmeta

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pvmeta/errors.hpp"
#include "pvmeta/fitscore.hpp"
#include "pvmeta/gp.hpp"
#include "pvmeta/io_util.hpp"

namespace pvmeta {

// Confidence-width schedule: phi_t = 2 ln(|domain| t^2 pi^2 / (6 delta)).
// Strictly increasing in t; drives the UCB exploration weight.
inline double phi_t(int t, size_t domain_size, double delta) {
  if (t < 1) throw InvalidConfig("phi_t requires t >= 1");
  if (domain_size < 2) throw InvalidConfig("phi_t requires a domain of at least 2 points");
  if (delta <= 0 || delta >= 1) throw InvalidConfig("phi_t requires delta in (0, 1)");
  const double td = static_cast<double>(t);
  return 2.0 * std::log(static_cast<double>(domain_size) * td * td * kPi * kPi / (6.0 * delta));
}

struct BoConfig {
  int budget = 100;      // total observations T
  int warm_start = 10;   // seeded uniform draws before UCB takes over
  double delta = 0.1;
  DomainGrid grid;
  KernelSpec kernel;
  std::uint64_t rng_seed = 0;
  // Validation mode: acquisition skips already-visited points while any
  // remain, so budget = |grid| guarantees exhaustive coverage.
  bool force_unvisited = false;

  void validate() const {
    if (budget < 1) throw InvalidConfig("budget must be >= 1");
    if (warm_start < 1) throw InvalidConfig("warm_start must be >= 1");
    if (warm_start >= budget) throw InvalidConfig("warm_start must be smaller than budget");
    if (delta <= 0 || delta >= 1) throw InvalidConfig("delta must lie in (0, 1)");
    if (grid.size() < 2) throw InvalidConfig("grid must contain at least 2 points");
  }
};

struct BoRecord {
  int t = 0;            // 1-based observation number
  double phi = 0;       // schedule value at t
  size_t grid_index = 0;
  SurfaceOrientation point;
  double score = 0;     // observed objective
  double mean_before = 0;  // posterior mean at the point before observing it
  double sd_before = 1;    // posterior standard deviation, same convention
  bool warm = false;    // warm-start draw rather than UCB acquisition
};

struct BoTrace {
  DomainGrid grid;
  std::vector<BoRecord> records;  // exactly budget entries
  GpState final_state;
  size_t incumbent_index = 0;     // grid index of the best observed score
  double incumbent_score = 0;
};

// UCB argmax over precomputed posterior summaries; first index wins ties,
// which is the lexicographically smallest (azimuth, tilt) by grid ordering.
inline size_t acquire(const std::vector<double>& means, const std::vector<double>& sds,
                      double phi) {
  if (means.empty() || means.size() != sds.size())
    throw InvalidConfig("acquire needs equal-sized nonempty posterior arrays");
  const double root_phi = std::sqrt(phi);
  size_t best = 0;
  double best_ucb = means[0] + root_phi * sds[0];
  for (size_t i = 1; i < means.size(); ++i) {
    const double u = means[i] + root_phi * sds[i];
    if (u > best_ucb) {
      best_ucb = u;
      best = i;
    }
  }
  return best;
}

namespace detail {

// Incremental posterior over the whole grid, kept in lockstep with a GpState.
// Row k of V is L^{-1}-transformed cross-covariance of observation k against
// every grid point, so mean = V^T w and variance = 1 - colwise ||V||^2 are
// O(t * n) to refresh after each observation instead of O(t^2 n).
class GridPosterior {
 public:
  GridPosterior(const DomainGrid& grid, const KernelSpec& spec)
      : spec_(spec), n_(grid.size()) {
    pts_.reserve(n_);
    for (size_t i = 0; i < n_; ++i) pts_.push_back(grid.point(i));
    sq_.assign(n_, 0.0);
  }

  // means/sds for the state with t observations (call after gp.update()).
  void sync(const GpState& gp) {
    const size_t t = gp.size();
    if (gp.revision() != revision_) {
      rebuild(gp);
      return;
    }
    if (t == rows_) return;
    if (t != rows_ + 1) {  // lost lockstep (e.g. caller skipped states)
      rebuild(gp);
      return;
    }
    grow_matrices(t);
    const auto& L = gp.chol_factor();
    const Eigen::Index ti = static_cast<Eigen::Index>(t);
    // Fresh cross-covariance row for the newly observed point.
    const SurfaceOrientation& p = gp.points().back();
    for (size_t j = 0; j < n_; ++j)
      Kx_(ti - 1, static_cast<Eigen::Index>(j)) = kernel(p, pts_[j], spec_);
    if (t == 1) {
      V_.row(0) = Kx_.row(0) / L(0, 0);
      w_.conservativeResize(1);
      w_[0] = gp.observations()[0] / L(0, 0);
    } else {
      const auto l12 = L.row(ti - 1).head(ti - 1);
      const double l22 = L(ti - 1, ti - 1);
      V_.row(ti - 1) = (Kx_.row(ti - 1) - l12 * V_.topRows(ti - 1)) / l22;
      w_.conservativeResize(ti);
      w_[ti - 1] =
          (gp.observations().back() - l12.dot(w_.head(ti - 1))) / l22;
    }
    for (size_t j = 0; j < n_; ++j) {
      const double v = V_(ti - 1, static_cast<Eigen::Index>(j));
      sq_[j] += v * v;
    }
    rows_ = t;
  }

  void summaries(std::vector<double>& means, std::vector<double>& sds) const {
    means.assign(n_, 0.0);
    sds.assign(n_, 1.0);
    if (rows_ == 0) return;
    const Eigen::Index ti = static_cast<Eigen::Index>(rows_);
    Eigen::VectorXd mu = V_.topRows(ti).transpose() * w_.head(ti);
    for (size_t j = 0; j < n_; ++j) {
      means[j] = mu[static_cast<Eigen::Index>(j)];
      sds[j] = std::sqrt(std::max(0.0, 1.0 - sq_[j]));
    }
  }

 private:
  void grow_matrices(size_t t) {
    const Eigen::Index ti = static_cast<Eigen::Index>(t);
    if (V_.rows() < ti) {
      Eigen::Index cap = std::max<Eigen::Index>(ti, V_.rows() * 2);
      V_.conservativeResize(cap, static_cast<Eigen::Index>(n_));
      Kx_.conservativeResize(cap, static_cast<Eigen::Index>(n_));
    }
  }

  // Jitter escalation replaced the whole factor: redo V = L^{-1} Kx.
  void rebuild(const GpState& gp) {
    const size_t t = gp.size();
    const Eigen::Index ti = static_cast<Eigen::Index>(t);
    grow_matrices(t);
    for (size_t i = rows_; i < t; ++i)
      for (size_t j = 0; j < n_; ++j)
        Kx_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            kernel(gp.points()[i], pts_[j], spec_);
    const auto& L = gp.chol_factor();
    V_.topRows(ti) = L.triangularView<Eigen::Lower>().solve(Kx_.topRows(ti));
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(gp.observations().data(), ti);
    w_ = L.triangularView<Eigen::Lower>().solve(y);
    for (size_t j = 0; j < n_; ++j)
      sq_[j] = V_.col(static_cast<Eigen::Index>(j)).head(ti).squaredNorm();
    rows_ = t;
    revision_ = gp.revision();
  }

  KernelSpec spec_;
  size_t n_ = 0;
  std::vector<SurfaceOrientation> pts_;
  size_t rows_ = 0;
  std::uint64_t revision_ = 0;
  Eigen::MatrixXd V_;   // L^{-1} Kx, first `rows_` rows valid
  Eigen::MatrixXd Kx_;  // raw cross-covariance, kept for rebuilds
  Eigen::VectorXd w_;   // L^{-1} observations
  std::vector<double> sq_;  // colwise squared norms of V
};

}  // namespace detail

// GP-UCB: seeded uniform warm start, then acquire/observe/update to the
// budget. The objective is memoized per grid point; re-acquired points reuse
// the stored value while the GP still receives the duplicate observation.
inline BoTrace run_bo(const std::function<double(const SurfaceOrientation&)>& objective,
                      const BoConfig& config) {
  config.validate();
  const size_t n = config.grid.size();
  std::mt19937_64 rng(config.rng_seed);
  std::uniform_int_distribution<size_t> uniform_cell(0, n - 1);

  BoTrace trace;
  trace.grid = config.grid;
  GpState gp(config.kernel);
  detail::GridPosterior grid_post(config.grid, config.kernel);
  std::vector<std::optional<double>> memo(n);
  std::vector<bool> visited(n, false);
  size_t visited_count = 0;
  std::vector<double> means(n, 0.0), sds(n, 1.0);

  auto observe = [&](size_t idx) -> double {
    if (!memo[idx]) memo[idx] = objective(config.grid.point(idx));
    if (!std::isfinite(*memo[idx]))
      throw NonFiniteScore("objective returned a non-finite value at grid index " +
                           std::to_string(idx));
    return *memo[idx];
  };

  for (int t = 1; t <= config.budget; ++t) {
    const bool warm = t <= config.warm_start;
    size_t idx;
    if (warm) {
      idx = uniform_cell(rng);
      if (config.force_unvisited && visited_count < n)
        while (visited[idx]) idx = uniform_cell(rng);
    } else if (config.force_unvisited && visited_count < n) {
      // Restrict the UCB argmax to unvisited cells.
      size_t best = n;
      double best_ucb = 0;
      const double root_phi = std::sqrt(phi_t(t, n, config.delta));
      for (size_t i = 0; i < n; ++i) {
        if (visited[i]) continue;
        const double u = means[i] + root_phi * sds[i];
        if (best == n || u > best_ucb) {
          best = i;
          best_ucb = u;
        }
      }
      idx = best;
    } else {
      idx = acquire(means, sds, phi_t(t, n, config.delta));
    }

    BoRecord rec;
    rec.t = t;
    rec.phi = phi_t(t, n, config.delta);
    rec.grid_index = idx;
    rec.point = config.grid.point(idx);
    rec.mean_before = means[idx];
    rec.sd_before = sds[idx];
    rec.warm = warm;
    rec.score = observe(idx);
    trace.records.push_back(rec);

    if (!visited[idx]) {
      visited[idx] = true;
      ++visited_count;
    }
    gp = gp.update(rec.point, rec.score);
    grid_post.sync(gp);
    grid_post.summaries(means, sds);
  }

  trace.final_state = gp;
  trace.incumbent_index = trace.records.front().grid_index;
  trace.incumbent_score = trace.records.front().score;
  for (const BoRecord& r : trace.records) {
    if (r.score > trace.incumbent_score) {
      trace.incumbent_score = r.score;
      trace.incumbent_index = r.grid_index;
    }
  }
  return trace;
}

// r_t = best achievable score on the grid minus the score observed at step t.
inline std::vector<double> instantaneous_regrets(const BoTrace& trace, double oracle_best) {
  std::vector<double> out;
  out.reserve(trace.records.size());
  for (const BoRecord& r : trace.records) out.push_back(oracle_best - r.score);
  return out;
}

inline std::string trace_csv(const BoTrace& trace, const std::string& meta_comment = "") {
  std::ostringstream out;
  if (!meta_comment.empty()) out << "# " << meta_comment << "\n";
  out << "t,phi,azimuth_deg,tilt_deg,score,mean_before,sd_before,warm\n";
  for (const BoRecord& r : trace.records) {
    out << r.t << ',' << fmt_double(r.phi) << ',' << fmt_double(r.point.azimuth_deg) << ','
        << fmt_double(r.point.tilt_deg) << ',' << fmt_double(r.score) << ','
        << fmt_double(r.mean_before) << ',' << fmt_double(r.sd_before) << ','
        << (r.warm ? 1 : 0) << '\n';
  }
  return out.str();
}

// Visit counts per touched grid cell, for density plots of the search.
inline std::string samples_csv(const BoTrace& trace, const std::string& meta_comment = "") {
  std::map<size_t, int> counts;
  for (const BoRecord& r : trace.records) ++counts[r.grid_index];
  std::ostringstream out;
  if (!meta_comment.empty()) out << "# " << meta_comment << "\n";
  out << "azimuth_deg,tilt_deg,visit_count\n";
  for (const auto& [idx, c] : counts) {
    const SurfaceOrientation p = trace.grid.point(idx);
    out << fmt_double(p.azimuth_deg) << ',' << fmt_double(p.tilt_deg) << ',' << c << '\n';
  }
  return out.str();
}

}  // namespace pvmeta

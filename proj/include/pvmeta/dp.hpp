#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "pvmeta/bo.hpp"
#include "pvmeta/errors.hpp"
#include "pvmeta/fitscore.hpp"
#include "pvmeta/gp.hpp"

namespace pvmeta {

struct DpParams {
  double epsilon = 1.0;
  double delta = 0.1;
  size_t domain_size = 0;  // |grid|
  int budget = 0;          // T, the optimization budget that produced the scores

  void validate() const {
    if (epsilon < 0) throw InvalidConfig("epsilon must be >= 0");
    if (delta <= 0 || delta >= 1) throw InvalidConfig("delta must lie in (0, 1)");
    if (domain_size < 2) throw InvalidConfig("domain_size must be >= 2");
    if (budget < 1) throw InvalidConfig("budget must be >= 1");
  }
};

// High-probability bound on how much one changed record can move the
// posterior mean anywhere on the grid; calibrates the release mechanism.
struct SensitivityBound {
  double phi_bar = 0;  // 2 ln(|domain| T^2 pi^2 / (2 delta))
  double nu = 0;       // ln(6 |domain| / delta)
  double bound = 0;    // 2 (sqrt(phi_bar) + sqrt(nu))
};

inline SensitivityBound sensitivity_bound(const DpParams& p) {
  p.validate();
  SensitivityBound b;
  const double m = static_cast<double>(p.domain_size);
  const double T = static_cast<double>(p.budget);
  b.phi_bar = 2.0 * std::log(m * T * T * kPi * kPi / (2.0 * p.delta));
  b.nu = std::log(6.0 * m / p.delta);
  b.bound = 2.0 * (std::sqrt(b.phi_bar) + std::sqrt(b.nu));
  return b;
}

// Alternative calibration kept for comparison: sqrt(phi) at T+1 on the
// optimization schedule plus the pre-split tail constant; the release then
// divides by 2*(2 sqrt(phi_{T+1}) + c).
inline double schedule_sensitivity(const DpParams& p) {
  p.validate();
  const double m = static_cast<double>(p.domain_size);
  const double phi = phi_t(p.budget + 1, p.domain_size, p.delta);
  const double c = std::sqrt(2.0 * std::log(2.0 * m / p.delta));
  return 2.0 * std::sqrt(phi) + c;
}

// Normalized log-probabilities of the exponential mechanism:
// Pr[i] proportional to exp(epsilon * score_i / (2 * sensitivity)) * prior_i.
// Stabilized by max subtraction; zero-prior cells come back as -inf.
inline std::vector<double> mechanism_log_probs(const std::vector<double>& scores,
                                               double epsilon, double sensitivity,
                                               const std::vector<double>& prior) {
  if (scores.empty()) throw InvalidConfig("mechanism needs a nonempty score vector");
  if (prior.size() != scores.size())
    throw InvalidConfig("prior and score vectors must have equal size");
  if (sensitivity <= 0) throw InvalidConfig("sensitivity must be positive");
  if (epsilon < 0) throw InvalidConfig("epsilon must be >= 0");

  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> g(scores.size());
  double gmax = neg_inf;
  bool any_support = false;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i]))
      throw NonFiniteScore("score at index " + std::to_string(i) + " is not finite");
    if (prior[i] < 0)
      throw DegeneratePrior("negative prior weight at index " + std::to_string(i));
    if (prior[i] == 0) {
      g[i] = neg_inf;
      continue;
    }
    any_support = true;
    g[i] = epsilon * scores[i] / (2.0 * sensitivity) + std::log(prior[i]);
    gmax = std::max(gmax, g[i]);
  }
  if (!any_support) throw DegeneratePrior("prior has no support (all weights zero)");

  double z = 0;
  for (double v : g)
    if (v != neg_inf) z += std::exp(v - gmax);
  const double log_z = gmax + std::log(z);
  for (double& v : g)
    if (v != neg_inf) v -= log_z;
  return g;
}

inline std::vector<double> probs_from_log(const std::vector<double>& log_probs) {
  std::vector<double> p(log_probs.size());
  for (size_t i = 0; i < p.size(); ++i)
    p[i] = std::isfinite(log_probs[i]) ? std::exp(log_probs[i]) : 0.0;
  return p;
}

// Inverse-CDF draw; u in [0, 1).
inline size_t inverse_cdf_sample(const std::vector<double>& probs, double u) {
  double cum = 0;
  size_t last_support = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0) continue;
    cum += probs[i];
    last_support = i;
    if (u < cum) return i;
  }
  return last_support;  // rounding pushed the total a hair under u
}

// One seeded draw from the mechanism.
inline size_t exponential_mechanism(const std::vector<double>& scores, double epsilon,
                                    double sensitivity, const std::vector<double>& prior,
                                    std::uint64_t seed) {
  const std::vector<double> p = probs_from_log(
      mechanism_log_probs(scores, epsilon, sensitivity, prior));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return inverse_cdf_sample(p, unif(rng));
}

// n seeded draws sharing one generator; reusing the same seed across
// parameter settings couples the uniform stream (common random numbers).
inline std::vector<size_t> draw_many(const std::vector<double>& probs, size_t n,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<size_t> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(inverse_cdf_sample(probs, unif(rng)));
  return out;
}

struct DpRelease {
  size_t sample_index = 0;
  SurfaceOrientation sample;
  DpParams params;
  SensitivityBound bound;          // proven-bound components, always reported
  double sensitivity_used = 0;     // what the mechanism actually divided by
  bool schedule_form = false;
  std::vector<double> log_weights;  // unnormalized exponents eps*mu/(2*Delta)
  std::vector<double> log_probs;    // normalized (uniform prior)
  std::uint64_t rng_seed = 0;
};

// Private selection of an orientation from a fitted optimization state:
// evaluate the posterior mean everywhere, then sample the exponential
// mechanism over the grid with a uniform prior.
inline DpRelease dp_release(const GpState& final_state, const DomainGrid& grid,
                            const DpParams& params, std::uint64_t seed,
                            bool schedule_form = false) {
  params.validate();
  if (params.domain_size != grid.size())
    throw InvalidConfig("params.domain_size does not match the grid");

  std::vector<SurfaceOrientation> pts;
  pts.reserve(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) pts.push_back(grid.point(i));
  std::vector<double> mu, var;
  final_state.posterior_batch(pts, mu, var);

  DpRelease rel;
  rel.params = params;
  rel.bound = sensitivity_bound(params);
  rel.schedule_form = schedule_form;
  rel.sensitivity_used = schedule_form ? schedule_sensitivity(params) : rel.bound.bound;
  rel.rng_seed = seed;

  std::vector<double> prior(grid.size(), 1.0);
  rel.log_probs = mechanism_log_probs(mu, params.epsilon, rel.sensitivity_used, prior);
  rel.log_weights.resize(mu.size());
  for (size_t i = 0; i < mu.size(); ++i)
    rel.log_weights[i] = params.epsilon * mu[i] / (2.0 * rel.sensitivity_used);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  rel.sample_index = inverse_cdf_sample(probs_from_log(rel.log_probs), unif(rng));
  rel.sample = grid.point(rel.sample_index);
  return rel;
}

// Analytic per-outcome probability-ratio check between two score maps whose
// sup-distance respects the sensitivity. Softmax exactness makes the ratio
// at most e^epsilon; a larger value means the mechanism is miscalibrated.
inline double dp_ratio_audit(const std::vector<double>& scores_a,
                             const std::vector<double>& scores_b, double epsilon,
                             double sensitivity) {
  if (scores_a.size() != scores_b.size())
    throw InvalidConfig("score maps must cover the same domain");
  double sup = 0;
  for (size_t i = 0; i < scores_a.size(); ++i)
    sup = std::max(sup, std::fabs(scores_a[i] - scores_b[i]));
  if (sup > sensitivity)
    throw SensitivityViolated("score maps differ by " + std::to_string(sup) +
                              " which exceeds the sensitivity " + std::to_string(sensitivity));
  const std::vector<double> prior(scores_a.size(), 1.0);
  const std::vector<double> pa =
      probs_from_log(mechanism_log_probs(scores_a, epsilon, sensitivity, prior));
  const std::vector<double> pb =
      probs_from_log(mechanism_log_probs(scores_b, epsilon, sensitivity, prior));
  double max_ratio = 0;
  for (size_t i = 0; i < pa.size(); ++i)
    if (pb[i] > 0) max_ratio = std::max(max_ratio, pa[i] / pb[i]);
  return max_ratio;
}

}  // namespace pvmeta

#include "qkad/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace qkad {

Prf1 precision_recall_f1(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.fn < 0 || c.tn < 0)
    throw std::invalid_argument("negative confusion counts");
  Prf1 out;
  const long long pred_pos = c.tp + c.fp;
  const long long actual_pos = c.tp + c.fn;
  out.precision =
      pred_pos > 0 ? static_cast<double>(c.tp) / static_cast<double>(pred_pos)
                   : 0.0;
  out.recall = actual_pos > 0 ? static_cast<double>(c.tp) /
                                    static_cast<double>(actual_pos)
                              : 0.0;
  const double pr = out.precision + out.recall;
  out.f1 = pr > 0.0 ? 2.0 * out.precision * out.recall / pr : 0.0;
  return out;
}

double phi_cdf(double x) {
  return 0.5 * (1.0 + std::erf(x / 1.4142135623730950488016887242097));
}

ScoreDistribution fold_statistics(std::span<const double> scores) {
  if (scores.size() < 2)
    throw std::invalid_argument("need at least two scores");
  ScoreDistribution d;
  const double n = static_cast<double>(scores.size());
  for (double s : scores) d.mu += s;
  d.mu /= n;
  double ss = 0.0;
  for (double s : scores) ss += (s - d.mu) * (s - d.mu);
  d.sigma = std::sqrt(ss / (n - 1.0));
  if (d.sigma < 1e-12) {
    d.sigma = 1e-12;
    d.sigma_floored = true;
  }
  return d;
}

double outperformance_probability(const ScoreDistribution& q,
                                  const ScoreDistribution& r, double lo,
                                  double hi) {
  if (!(q.sigma > 0.0) || !(r.sigma > 0.0))
    throw std::invalid_argument("sigma must be positive");
  if (!(lo < hi)) throw std::invalid_argument("need lo < hi");

  // Difference Q - R is normal; condition on it lying in [lo, hi] and ask
  // for the mass above 0.
  const double mu = q.mu - r.mu;
  const double sigma = std::sqrt(q.sigma * q.sigma + r.sigma * r.sigma);

  const double z_lo = (lo - mu) / sigma;
  const double z_hi = (hi - mu) / sigma;
  const double z_zero = (std::max(lo, 0.0) - mu) / sigma;
  const double denom = phi_cdf(z_hi) - phi_cdf(z_lo);
  if (denom <= 0.0) {
    // All conditional mass collapses to one side; fall back to the step
    // behaviour of a point difference.
    return mu > 0.0 ? 1.0 : 0.0;
  }
  if (hi <= 0.0) return 0.0;
  return (phi_cdf(z_hi) - phi_cdf(z_zero)) / denom;
}

}  // namespace qkad

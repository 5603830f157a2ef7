#pragma once

#include <span>

namespace qkad {

// Positive class is the anomaly.
struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  long long tn = 0;
};

struct Prf1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Empty denominators give 0 rather than NaN.
Prf1 precision_recall_f1(const ConfusionCounts& c);

// Standard normal CDF.
double phi_cdf(double x);

struct ScoreDistribution {
  double mu = 0.0;
  double sigma = 0.0;
  bool sigma_floored = false;
};

// Mean and sample standard deviation of per-fold scores. A degenerate
// spread is floored at 1e-12 and flagged so ScoreDistribution stays usable
// downstream.
ScoreDistribution fold_statistics(std::span<const double> scores);

// P(Q > R | Q - R in [lo, hi]) for independent normals Q and R, i.e. the
// truncated-normal probability that the candidate's score exceeds the
// reference's.
double outperformance_probability(const ScoreDistribution& q,
                                  const ScoreDistribution& r, double lo = -1.0,
                                  double hi = 1.0);

}  // namespace qkad

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

#include "dpbayes/error.hpp"
#include "dpbayes/graph.hpp"

namespace dpbayes {

inline double log_beta_function(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

/// KL(Beta(p) || Beta(q)) in closed form.
inline double kl_beta(BetaParams p, BetaParams q) {
  require(p.valid() && q.valid(), ErrorCode::InvalidArgument, "Beta parameters must be positive");
  using boost::math::digamma;
  const double kl = log_beta_function(q.alpha, q.beta) - log_beta_function(p.alpha, p.beta) +
                    (p.alpha - q.alpha) * digamma(p.alpha) + (p.beta - q.beta) * digamma(p.beta) +
                    (q.alpha - p.alpha + q.beta - p.beta) * digamma(p.alpha + p.beta);
  return std::max(kl, 0.0);
}

struct KlReport {
  EntryTable<double> per_entry;
  double total = 0.0;
};

/// Joint KL between product posteriors is the sum of per-entry divergences.
inline KlReport kl_report(const BetaTable& exact, const BetaTable& perturbed) {
  require(exact.layout() == perturbed.layout(), ErrorCode::DimensionMismatch,
          "posterior layouts differ");
  KlReport r{EntryTable<double>(exact.layout(), std::vector<double>(exact.size(), 0.0)), 0.0};
  for (std::size_t k = 0; k < exact.size(); ++k) {
    r.per_entry[k] = kl_beta(exact[k], perturbed[k]);
    r.total += r.per_entry[k];
  }
  return r;
}

/// Predicts class 1 when probability >= threshold (a tie at 0.5 goes to 1).
inline int classify(double probability, double threshold = 0.5) {
  return probability >= threshold ? 1 : 0;
}

inline double accuracy(std::span<const double> predictions, std::span<const int> labels,
                       double threshold = 0.5) {
  require(predictions.size() == labels.size(), ErrorCode::LengthMismatch,
          "prediction and label counts differ");
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (classify(predictions[k], threshold) == labels[k]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

struct MeanStat {
  double mean = 0.0;
  double standard_error = 0.0;
};

inline MeanStat mean_and_se(std::span<const double> values) {
  MeanStat s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.standard_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return s;
}

}  // namespace dpbayes

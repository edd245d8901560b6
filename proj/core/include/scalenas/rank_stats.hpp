#pragma once

#include <stdexcept>
#include <vector>

namespace scalenas {

// Pearson / Spearman / Kendall coefficients over paired (accuracy, FLOPs)
// vectors, with Kendall following the tie-discordant absolute-value
// convention: pairs with (dACC)(df) > 0 are concordant, <= 0 discordant, and
// the reported value is |(C - D) / (Q(Q-1)/2)| in [0, 1].

struct PairedSeries {
  std::vector<double> acc;
  std::vector<double> flops;

  std::size_t size() const { return acc.size(); }
  void validate() const {
    if (acc.size() != flops.size())
      throw std::invalid_argument("paired series length mismatch");
    if (acc.size() < 2) throw std::invalid_argument("need Q >= 2");
  }
};

struct ConstantVectorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Population covariance over the product of population standard deviations.
// Throws ConstantVectorError when either vector is constant.
double pearson(const PairedSeries& series);

// Closed form 1 - 6*sum(d^2)/(Q(Q^2-1)) when both vectors are tie-free;
// Pearson over midranks otherwise.
double spearman(const PairedSeries& series);

struct KendallResult {
  double tau_abs = 0.0;             // |(C - D)| / (Q(Q-1)/2), in [0, 1]
  bool degenerate_constant = false; // a constant vector forces 1.0
};

// O(Q log Q) merge-count when tie-free, O(Q^2) otherwise.
double kendall(const PairedSeries& series);
KendallResult kendall_report(const PairedSeries& series);

// O(Q^2) reference used by tests and benchmarks.
double kendall_bruteforce(const PairedSeries& series);

// Midranks (average rank for ties), 1-based.
std::vector<double> midranks(const std::vector<double>& v);

}  // namespace scalenas

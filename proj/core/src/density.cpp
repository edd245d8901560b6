#include "scalenas/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scalenas {

ModeReport detect_flops_modes(const std::vector<long long>& flops_samples,
                              const DensityParams& params) {
  ModeReport rep;
  if (flops_samples.empty()) return rep;
  if (params.bandwidth_log2 <= 0.0 || params.grid_points < 8)
    throw std::invalid_argument("bad density parameters");

  std::vector<double> x;
  x.reserve(flops_samples.size());
  for (long long f : flops_samples) {
    if (f <= 0) throw std::invalid_argument("non-positive FLOPs sample");
    x.push_back(std::log2(static_cast<double>(f)));
  }
  const auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *mn_it - params.pad_log2;
  const double hi = *mx_it + params.pad_log2;
  const int n_grid = params.grid_points;

  // Pre-bin the samples, then evaluate the kernel from bin centers.
  const int n_bins = n_grid * 8;
  const double bin_w = (hi - lo) / n_bins;
  std::vector<double> counts(static_cast<std::size_t>(n_bins), 0.0);
  for (double v : x) {
    int b = static_cast<int>((v - lo) / bin_w);
    b = std::clamp(b, 0, n_bins - 1);
    counts[static_cast<std::size_t>(b)] += 1.0;
  }

  const double h = params.bandwidth_log2;
  const double norm =
      1.0 / (static_cast<double>(x.size()) * h * std::sqrt(2.0 * M_PI));
  rep.grid_log2.resize(static_cast<std::size_t>(n_grid));
  rep.density.assign(static_cast<std::size_t>(n_grid), 0.0);
  const double cut = 6.0 * h;  // kernel support cutoff (exp(-18) ~ 1.5e-8)
  for (int g = 0; g < n_grid; ++g) {
    const double gx = lo + (hi - lo) * g / (n_grid - 1);
    rep.grid_log2[static_cast<std::size_t>(g)] = gx;
    const int b_lo = std::max(0, static_cast<int>((gx - cut - lo) / bin_w));
    const int b_hi = std::min(n_bins, static_cast<int>((gx + cut - lo) / bin_w) + 1);
    double d = 0.0;
    for (int b = b_lo; b < b_hi; ++b) {
      if (counts[static_cast<std::size_t>(b)] == 0.0) continue;
      const double c = lo + (b + 0.5) * bin_w;
      const double z = (gx - c) / h;
      d += counts[static_cast<std::size_t>(b)] * std::exp(-0.5 * z * z);
    }
    rep.density[static_cast<std::size_t>(g)] = d * norm;
  }

  // Local maxima filtered by prominence: height above the higher of the two
  // saddles toward the nearest strictly higher ground (or the global minimum
  // of the open side at the boundaries).
  const auto& d = rep.density;
  double dmax = 0.0;
  for (double v : d) dmax = std::max(dmax, v);
  const double thr = params.rel_prominence * dmax;
  for (int i = 1; i + 1 < n_grid; ++i) {
    if (!(d[i] > d[i - 1] && d[i] >= d[i + 1])) continue;
    double left_min = d[i];
    for (int l = i - 1; l >= 0; --l) {
      if (d[l] > d[i]) break;
      left_min = std::min(left_min, d[l]);
    }
    double right_min = d[i];
    for (int r = i + 1; r < n_grid; ++r) {
      if (d[r] > d[i]) break;
      right_min = std::min(right_min, d[r]);
    }
    const double prominence = d[i] - std::max(left_min, right_min);
    if (prominence >= thr)
      rep.modes.push_back(std::exp2(rep.grid_log2[static_cast<std::size_t>(i)]));
  }
  return rep;
}

}  // namespace scalenas

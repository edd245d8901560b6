#include "scalenas/rank_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace scalenas {

namespace {

bool is_constant(const std::vector<double>& v) {
  for (double x : v)
    if (x != v.front()) return false;
  return true;
}

bool has_ties(const std::vector<double>& v) {
  std::vector<double> s = v;
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

double pearson_raw(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    cov += dx * dy;
    vx += dx * dx;
    vy += dy * dy;
  }
  return cov / std::sqrt(vx * vy);  // population factors cancel
}

// Counts inversions of `v` in place via merge sort.
long long count_inversions(std::vector<double>& v, std::vector<double>& tmp,
                           std::size_t lo, std::size_t hi) {
  if (hi - lo <= 1) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inv = count_inversions(v, tmp, lo, mid) +
                  count_inversions(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[i] <= v[j]) {
      tmp[k++] = v[i++];
    } else {
      inv += static_cast<long long>(mid - i);
      tmp[k++] = v[j++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + static_cast<long>(lo), tmp.begin() + static_cast<long>(hi),
            v.begin() + static_cast<long>(lo));
  return inv;
}

}  // namespace

std::vector<double> midranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(const PairedSeries& series) {
  series.validate();
  if (is_constant(series.acc) || is_constant(series.flops))
    throw ConstantVectorError("pearson undefined for a constant vector");
  return pearson_raw(series.acc, series.flops);
}

double spearman(const PairedSeries& series) {
  series.validate();
  const std::size_t n = series.size();
  if (!has_ties(series.acc) && !has_ties(series.flops)) {
    const auto ra = midranks(series.acc);
    const auto rf = midranks(series.flops);
    double sum_d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = ra[i] - rf[i];
      sum_d2 += d * d;
    }
    const double q = static_cast<double>(n);
    return 1.0 - 6.0 * sum_d2 / (q * (q * q - 1.0));
  }
  if (is_constant(series.acc) || is_constant(series.flops))
    throw ConstantVectorError("spearman undefined for a constant vector");
  return pearson_raw(midranks(series.acc), midranks(series.flops));
}

double kendall_bruteforce(const PairedSeries& series) {
  series.validate();
  const std::size_t n = series.size();
  long long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = (series.acc[i] - series.acc[j]) *
                       (series.flops[i] - series.flops[j]);
      if (p > 0.0)
        ++concordant;
      else
        ++discordant;  // ties land here, per the <= 0 convention
    }
  const double total = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
  return std::fabs(static_cast<double>(concordant - discordant) / total);
}

KendallResult kendall_report(const PairedSeries& series) {
  series.validate();
  KendallResult res;
  res.degenerate_constant =
      is_constant(series.acc) || is_constant(series.flops);
  if (has_ties(series.acc) || has_ties(series.flops)) {
    res.tau_abs = kendall_bruteforce(series);
    return res;
  }
  // Tie-free: sort by flops, count acc inversions; every pair is strictly
  // concordant or discordant, so D = inversions and C = total - D.
  const std::size_t n = series.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&series](std::size_t a, std::size_t b) {
    return series.flops[a] < series.flops[b];
  });
  std::vector<double> acc_sorted(n);
  for (std::size_t i = 0; i < n; ++i) acc_sorted[i] = series.acc[idx[i]];
  std::vector<double> tmp(n);
  const long long inv = count_inversions(acc_sorted, tmp, 0, n);
  const long long total =
      static_cast<long long>(n) * (static_cast<long long>(n) - 1) / 2;
  res.tau_abs = std::fabs(static_cast<double>(total - 2 * inv) /
                          static_cast<double>(total));
  return res;
}

double kendall(const PairedSeries& series) { return kendall_report(series).tau_abs; }

}  // namespace scalenas

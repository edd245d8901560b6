#include "scalenas/scaling_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scalenas {

namespace {

constexpr double kMinA0 = 1e-12;

// Residual sum of squares over the fitted points (j >= 1 by precondition).
double rss_of(const FamilyParams& p, const DimPoints& pts) {
  double rss = 0.0;
  for (const auto& [j, y] : pts) {
    const double e = eval_family(p, j) - y;
    rss += e * e;
  }
  return rss;
}

// For fixed a1, the exponential model is linear in a0 through the origin on
// z_j = y_j - 1 against g_j = a1^j - 1; the optimal a0 has a closed form.
double profile_a0(double a1, const DimPoints& pts) {
  double num = 0.0, den = 0.0;
  for (const auto& [j, y] : pts) {
    const double g = std::pow(a1, j) - 1.0;
    num += g * (y - 1.0);
    den += g * g;
  }
  if (den <= 0.0) return kMinA0;
  return std::max(kMinA0, num / den);
}

double exp_rss_at(double a1, const DimPoints& pts) {
  return rss_of({Family::exponential, profile_a0(a1, pts), a1}, pts);
}

DimensionFit fit_exponential(const DimPoints& pts) {
  // Coarse grid, log-spaced in (a1 - 1) from 1e-6 to ~30.
  const int kGrid = 600;
  const double lo = std::log(1e-6), hi = std::log(30.0);
  double best_u = lo, best_rss = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double u = lo + (hi - lo) * i / (kGrid - 1);
    const double r = exp_rss_at(1.0 + std::exp(u), pts);
    if (r < best_rss) {
      best_rss = r;
      best_u = u;
    }
  }
  // Golden-section refinement of u = log(a1 - 1) around the best grid cell;
  // the profile in a0 makes each probe an exact coordinate minimization.
  const double step = (hi - lo) / (kGrid - 1);
  double a = std::max(lo, best_u - step), b = std::min(hi, best_u + step);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = exp_rss_at(1.0 + std::exp(c), pts);
  double fd = exp_rss_at(1.0 + std::exp(d), pts);
  while (b - a > 1e-6 * 1e-2) {  // relative step shrink to 1e-6 on a1-1
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = exp_rss_at(1.0 + std::exp(c), pts);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = exp_rss_at(1.0 + std::exp(d), pts);
    }
  }
  const double a1 = 1.0 + std::exp((a + b) / 2.0);
  DimensionFit fit;
  fit.params = {Family::exponential, profile_a0(a1, pts), a1};
  fit.rss = rss_of(fit.params, pts);
  return fit;
}

DimensionFit fit_linear(const DimPoints& pts) {
  double num = 0.0, den = 0.0;
  for (const auto& [j, y] : pts) {
    num += static_cast<double>(j) * (y - 1.0);
    den += static_cast<double>(j) * j;
  }
  DimensionFit fit;
  fit.params = {Family::linear, std::max(kMinA0, num / den), 0.0};
  fit.rss = rss_of(fit.params, pts);
  return fit;
}

DimensionFit fit_squared(const DimPoints& pts) {
  // Unconstrained 2x2 normal equations for z = a0*j^2 + a1*j.
  double s22 = 0.0, s21 = 0.0, s11 = 0.0, b2 = 0.0, b1 = 0.0;
  for (const auto& [ji, y] : pts) {
    const double j = ji, z = y - 1.0;
    s22 += j * j * j * j;
    s21 += j * j * j;
    s11 += j * j;
    b2 += j * j * z;
    b1 += j * z;
  }
  const double det = s22 * s11 - s21 * s21;
  double a0, a1;
  if (std::fabs(det) < 1e-300) {
    a0 = kMinA0;
    a1 = b1 / s11;
  } else {
    a0 = (b2 * s11 - s21 * b1) / det;
    a1 = (s22 * b1 - s21 * b2) / det;
    if (a0 <= 0.0) {
      // Project onto the a0 > 0 boundary and re-solve for a1.
      a0 = kMinA0;
      a1 = (b1 - a0 * s21) / s11;
    }
  }
  DimensionFit fit;
  fit.params = {Family::squared, a0, a1};
  fit.rss = rss_of(fit.params, pts);
  return fit;
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::exponential: return "exponential";
    case Family::linear: return "linear";
    case Family::squared: return "squared";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "exponential") return Family::exponential;
  if (name == "linear") return Family::linear;
  if (name == "squared") return Family::squared;
  throw FitError("unknown family: " + name);
}

double eval_family(const FamilyParams& p, double j) {
  switch (p.family) {
    case Family::exponential: return p.a0 * (std::pow(p.a1, j) - 1.0) + 1.0;
    case Family::linear: return p.a0 * j + 1.0;
    case Family::squared: return p.a0 * j * j + p.a1 * j + 1.0;
  }
  return 1.0;
}

ScalingPoints ScalingPoints::from_strategies(
    const std::vector<std::pair<int, ScalingStrategy>>& staged) {
  ScalingPoints pts;
  for (const auto& [j, s] : staged) {
    pts.d.emplace_back(j, s.d());
    pts.w.emplace_back(j, s.w());
    pts.r.emplace_back(j, s.r());
  }
  return pts;
}

DimensionFit fit_dimension(const DimPoints& raw, Family family) {
  // j = 0 is exact by construction and excluded from the objective.
  DimPoints pts;
  for (const auto& [j, y] : raw) {
    if (y < 1.0) throw FitError("fit values must be >= 1");
    if (j >= 1) pts.emplace_back(j, y);
  }
  const std::size_t need = (family == Family::linear) ? 1 : 2;
  if (pts.size() < need)
    throw FitError("fewer fit points than parameters for family " +
                   family_name(family));
  switch (family) {
    case Family::exponential: return fit_exponential(pts);
    case Family::linear: return fit_linear(pts);
    case Family::squared: return fit_squared(pts);
  }
  throw FitError("unreachable");
}

FitReport fit_scaling_law(const ScalingPoints& points, Family family) {
  FitReport rep;
  rep.family = family;
  rep.d = fit_dimension(points.d, family);
  rep.w = fit_dimension(points.w, family);
  rep.r = fit_dimension(points.r, family);
  return rep;
}

ScalingStrategy extrapolate(const FitReport& report, int j) {
  if (j < 0) throw FitError("stage index must be >= 0");
  if (j == 0) return ScalingStrategy::identity();
  auto snap = [](double v) {
    return static_cast<int>(std::max(1000LL, std::llround(v * 1000.0)));
  };
  return {snap(eval_family(report.d.params, j)),
          snap(eval_family(report.w.params, j)),
          snap(eval_family(report.r.params, j))};
}

std::vector<FitReport> compare_families(const ScalingPoints& points) {
  std::vector<FitReport> reports;
  for (Family f : {Family::exponential, Family::linear, Family::squared})
    reports.push_back(fit_scaling_law(points, f));
  std::stable_sort(reports.begin(), reports.end(),
                   [](const FitReport& a, const FitReport& b) {
                     return a.total_rss() < b.total_rss();
                   });
  return reports;
}

}  // namespace scalenas

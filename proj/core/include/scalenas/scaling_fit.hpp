#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "scalenas/arch.hpp"

namespace scalenas {

// Scaling-law generalization: fit, per dimension, one of
//   exponential  f(j) = a0 * (a1^j - 1) + 1      (a0 > 0, a1 > 1)
//   linear       f(j) = a0 * j + 1               (a0 > 0)
//   squared      f(j) = a0 * j^2 + a1 * j + 1    (a0 > 0)
// to searched stages and extrapolate to larger stages. Every family
// evaluates to exactly 1 at j = 0; residuals are summed over j >= 1 only.

enum class Family { exponential, linear, squared };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

struct FamilyParams {
  Family family = Family::exponential;
  double a0 = 0.0;
  double a1 = 0.0;  // unused for the linear family
};

double eval_family(const FamilyParams& p, double j);

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fit points for one dimension: (stage index j, multiplier value).
using DimPoints = std::vector<std::pair<int, double>>;

struct ScalingPoints {
  DimPoints d, w, r;

  // Convenience: decompose per-stage strategies into the three dimensions.
  static ScalingPoints from_strategies(
      const std::vector<std::pair<int, ScalingStrategy>>& staged);
};

struct DimensionFit {
  FamilyParams params;
  double rss = 0.0;
};

struct FitReport {
  Family family = Family::exponential;
  DimensionFit d, w, r;
  double total_rss() const { return d.rss + w.rss + r.rss; }
};

// Deterministic nonlinear least squares: profile-optimal a0 on a coarse
// log-spaced a1 grid, then golden-section refinement of a1 (relative step
// shrink to 1e-6); closed forms for the linear and squared families.
// Throws FitError for fewer points than parameters or values < 1.
FitReport fit_scaling_law(const ScalingPoints& points, Family family);
DimensionFit fit_dimension(const DimPoints& points, Family family);

// Evaluate the fitted triple at stage j and snap to the 3-decimal strategy
// precision; feeds apply_strategy directly. j = 0 is exactly (1, 1, 1).
ScalingStrategy extrapolate(const FitReport& report, int j);

// All three families, ranked by total residual sum of squares (ascending).
std::vector<FitReport> compare_families(const ScalingPoints& points);

}  // namespace scalenas

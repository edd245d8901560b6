#pragma once

#include <string>
#include <vector>

#include "scalenas/mcea.hpp"
#include "scalenas/scaling_fit.hpp"

namespace scalenas {

// Standalone SVG plot builders (no display dependency); callers persist the
// returned markup with atomic_write_file.

// HSS vs pooled-uniform FLOPs distributions as log2-binned histograms with
// dashed budget markers.
std::string svg_flops_histograms(const std::vector<long long>& hss,
                                 const std::vector<long long>& uniform,
                                 const std::vector<long long>& budgets,
                                 int bins = 120);

// Observed per-stage multipliers (dots) and fitted family curves per
// dimension, drawn through stage j_max.
std::string svg_fit_curves(const ScalingPoints& points,
                           const std::vector<FitReport>& fits, int j_max);

// Per-stage accuracy standard deviation across MCEA iterations.
std::string svg_telemetry(const std::vector<IterationRecord>& records);

}  // namespace scalenas

#pragma once

#include <vector>

namespace scalenas {

// Gaussian kernel density estimate over log2(FLOPs) with local-maximum mode
// detection; used to count the humps of a sampled FLOPs distribution
// (multi-modal for HSS, unimodal for the pooled-uniform baseline).

struct DensityParams {
  double bandwidth_log2 = 0.20;   // kernel width in log2-FLOPs units
  int grid_points = 512;          // evaluation grid resolution
  double rel_prominence = 0.05;   // peak prominence threshold vs. max density
  double pad_log2 = 0.5;          // padding beyond the sample range
};

struct ModeReport {
  std::vector<double> modes;      // peak positions, back-transformed to FLOPs
  std::vector<double> grid_log2;  // evaluation grid (log2 FLOPs)
  std::vector<double> density;    // KDE values on the grid
};

// Samples are binned into a fine histogram (8x the grid resolution) before
// kernel evaluation; bin width is far below any sane bandwidth, so the
// approximation error is negligible while large draws stay O(n + grid*bins).
ModeReport detect_flops_modes(const std::vector<long long>& flops_samples,
                              const DensityParams& params = {});

}  // namespace scalenas

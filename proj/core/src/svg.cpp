#include "scalenas/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace scalenas {

namespace {

constexpr double kW = 860.0, kH = 420.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 34.0, kBottom = 52.0;
const char* kPalette[] = {"#1f6feb", "#d1242f", "#2da44e", "#bf8700",
                          "#8250df", "#cf222e"};

struct Plot {
  std::ostringstream s;
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  double px(double x) const {
    return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight);
  }
  double py(double y) const {
    return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom);
  }

  void open(const std::string& title) {
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2
      << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << title << "</text>\n";
  }
  void axes(const std::string& xlabel, const std::string& ylabel, int xticks,
            int yticks, int precision) {
    s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
      << kW - kLeft - kRight << "\" height=\"" << kH - kTop - kBottom
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= xticks; ++i) {
      const double x = x0 + (x1 - x0) * i / xticks;
      s << "<line x1=\"" << px(x) << "\" y1=\"" << kH - kBottom << "\" x2=\""
        << px(x) << "\" y2=\"" << kH - kBottom + 5
        << "\" stroke=\"#444\"/>\n<text x=\"" << px(x) << "\" y=\""
        << kH - kBottom + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">";
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.*f", precision, x);
      s << buf << "</text>\n";
    }
    for (int i = 0; i <= yticks; ++i) {
      const double y = y0 + (y1 - y0) * i / yticks;
      s << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(y) << "\" x2=\""
        << kLeft << "\" y2=\"" << py(y) << "\" stroke=\"#444\"/>\n<text x=\""
        << kLeft - 8 << "\" y=\"" << py(y) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">";
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.3g", y);
      s << buf << "</text>\n";
    }
    s << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">"
      << xlabel << "</text>\n<text x=\"16\" y=\"" << (kTop + kH - kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 16 "
      << (kTop + kH - kBottom) / 2 << ")\">" << ylabel << "</text>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts,
                const char* color, double width, bool dashed = false) {
    if (pts.empty()) return;
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
      << width << "\"";
    if (dashed) s << " stroke-dasharray=\"5,4\"";
    s << " points=\"";
    for (const auto& [x, y] : pts) s << px(x) << "," << py(y) << " ";
    s << "\"/>\n";
  }
  void dot(double x, double y, const char* color, double r = 4.0) {
    s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"" << r
      << "\" fill=\"" << color << "\"/>\n";
  }
  void vline(double x, const char* color) {
    s << "<line x1=\"" << px(x) << "\" y1=\"" << kTop << "\" x2=\"" << px(x)
      << "\" y2=\"" << kH - kBottom << "\" stroke=\"" << color
      << "\" stroke-dasharray=\"3,3\"/>\n";
  }
  void legend(const std::vector<std::pair<std::string, const char*>>& items) {
    double y = kTop + 16;
    for (const auto& [label, color] : items) {
      s << "<rect x=\"" << kW - kRight - 170 << "\" y=\"" << y - 9
        << "\" width=\"14\" height=\"10\" fill=\"" << color
        << "\"/>\n<text x=\"" << kW - kRight - 150 << "\" y=\"" << y
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << label
        << "</text>\n";
      y += 17;
    }
  }
  std::string close() {
    s << "</svg>\n";
    return s.str();
  }
};

std::vector<double> bin_counts(const std::vector<long long>& flops, double lo,
                               double hi, int bins) {
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  if (flops.empty() || hi <= lo) return counts;
  for (long long f : flops) {
    if (f <= 0) continue;
    const double x = std::log2(static_cast<double>(f));
    int b = static_cast<int>((x - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    counts[static_cast<std::size_t>(b)] += 1.0;
  }
  const double total = static_cast<double>(flops.size());
  for (double& c : counts) c /= total;
  return counts;
}

}  // namespace

std::string svg_flops_histograms(const std::vector<long long>& hss,
                                 const std::vector<long long>& uniform,
                                 const std::vector<long long>& budgets,
                                 int bins) {
  double lo = 1e300, hi = -1e300;
  for (const auto* v : {&hss, &uniform})
    for (long long f : *v)
      if (f > 0) {
        const double x = std::log2(static_cast<double>(f));
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
  for (long long b : budgets)
    if (b > 0) {
      const double x = std::log2(static_cast<double>(b));
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  if (hi < lo) {
    lo = 0.0;
    hi = 1.0;
  }
  lo -= 0.25;
  hi += 0.25;

  const auto ch = bin_counts(hss, lo, hi, bins);
  const auto cu = bin_counts(uniform, lo, hi, bins);
  double peak = 1e-12;
  for (double c : ch) peak = std::max(peak, c);
  for (double c : cu) peak = std::max(peak, c);

  Plot p;
  p.x0 = lo;
  p.x1 = hi;
  p.y0 = 0.0;
  p.y1 = peak * 1.08;
  p.open("Path FLOPs distribution (hierarchical vs pooled-uniform sampling)");
  p.axes("log2(FLOPs)", "fraction of draws", 8, 5, 1);
  auto outline = [&](const std::vector<double>& counts, const char* color) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(counts.size() * 2 + 2);
    const double step = (hi - lo) / bins;
    pts.emplace_back(lo, 0.0);
    for (int i = 0; i < bins; ++i) {
      pts.emplace_back(lo + i * step, counts[static_cast<std::size_t>(i)]);
      pts.emplace_back(lo + (i + 1) * step,
                       counts[static_cast<std::size_t>(i)]);
    }
    pts.emplace_back(hi, 0.0);
    p.polyline(pts, color, 1.6);
  };
  outline(cu, kPalette[1]);
  outline(ch, kPalette[0]);
  for (long long b : budgets)
    if (b > 0) p.vline(std::log2(static_cast<double>(b)), "#555");
  p.legend({{"hierarchical", kPalette[0]}, {"pooled uniform", kPalette[1]}});
  return p.close();
}

std::string svg_fit_curves(const ScalingPoints& points,
                           const std::vector<FitReport>& fits, int j_max) {
  Plot p;
  double ymax = 1.0;
  const DimPoints* dims[3] = {&points.d, &points.w, &points.r};
  for (const auto* dp : dims)
    for (const auto& [j, v] : *dp) ymax = std::max(ymax, v);
  for (const FitReport& r : fits)
    for (const DimensionFit* f : {&r.d, &r.w, &r.r})
      ymax = std::max(ymax, eval_family(f->params, j_max));
  p.x0 = 0.0;
  p.x1 = static_cast<double>(std::max(1, j_max));
  p.y0 = 1.0;
  p.y1 = ymax * 1.05;
  p.open("Scaling-strategy multipliers and fitted laws");
  p.axes("scaling stage j", "multiplier", std::max(1, j_max), 5, 0);

  const char* dim_color[3] = {kPalette[0], kPalette[1], kPalette[2]};
  const char* dim_name[3] = {"depth d", "width w", "resolution r"};
  std::vector<std::pair<std::string, const char*>> legend;
  for (int dim = 0; dim < 3; ++dim) {
    legend.emplace_back(dim_name[dim], dim_color[dim]);
    for (const auto& [j, v] : *dims[dim])
      p.dot(static_cast<double>(j), v, dim_color[dim]);
  }
  for (std::size_t fi = 0; fi < fits.size(); ++fi) {
    const FitReport& r = fits[fi];
    const DimensionFit* dfits[3] = {&r.d, &r.w, &r.r};
    for (int dim = 0; dim < 3; ++dim) {
      std::vector<std::pair<double, double>> pts;
      for (int i = 0; i <= 60; ++i) {
        const double j = p.x1 * i / 60.0;
        pts.emplace_back(j, eval_family(dfits[dim]->params, j));
      }
      p.polyline(pts, dim_color[dim], fi == 0 ? 1.8 : 1.0, fi != 0);
    }
    legend.emplace_back(family_name(r.family) + (fi == 0 ? " (best)" : ""),
                        "#777");
  }
  p.legend(legend);
  return p.close();
}

std::string svg_telemetry(const std::vector<IterationRecord>& records) {
  Plot p;
  double ymax = 1e-9;
  std::size_t stages = 0;
  for (const auto& r : records) {
    stages = std::max(stages, r.stage_acc_std.size());
    for (double s : r.stage_acc_std) ymax = std::max(ymax, s);
  }
  p.x0 = records.empty() ? 0.0 : 1.0;
  p.x1 = records.empty() ? 1.0 : static_cast<double>(records.size());
  if (p.x1 <= p.x0) p.x1 = p.x0 + 1.0;
  p.y0 = 0.0;
  p.y1 = ymax * 1.1;
  p.open("Population accuracy spread per scaling stage");
  p.axes("iteration t", "accuracy std", std::max<int>(1, static_cast<int>(records.size()) - 1),
         5, 0);
  std::vector<std::pair<std::string, const char*>> legend;
  for (std::size_t j = 0; j < stages; ++j) {
    const char* color = kPalette[j % 6];
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : records)
      if (j < r.stage_acc_std.size())
        pts.emplace_back(static_cast<double>(r.t), r.stage_acc_std[j]);
    p.polyline(pts, color, 1.8);
    for (const auto& [x, y] : pts) p.dot(x, y, color, 3.0);
    legend.emplace_back("stage " + std::to_string(j + 1), color);
  }
  p.legend(legend);
  return p.close();
}

}  // namespace scalenas

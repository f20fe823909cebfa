#pragma once

#include <string>
#include <vector>

#include "wsg/metrics.hpp"

namespace wsg::plots {

// Parsed metric log (the trainer's tab-separated lines). val_acc holds
// NaN on iterations without a validation pass.
struct MetricLog {
  std::vector<long long> iter;
  std::vector<double> l_rec, l_reg, l_rel, l_rank, total, val_acc;
};

MetricLog parse_metric_log(const std::string& path);

// Accuracy-vs-IoU-threshold curve from an evaluation report. The CSV
// holds one row per threshold with values printed exactly (shortest
// round-trip form); the SVG is a self-contained line chart.
std::string threshold_curve_csv(const metrics::MetricsReport& report);
std::string threshold_curve_svg(const metrics::MetricsReport& report);

// Loss components (and validation accuracy where present) over
// training iterations.
std::string loss_curves_csv(const MetricLog& log);
std::string loss_curves_svg(const MetricLog& log);

}  // namespace wsg::plots

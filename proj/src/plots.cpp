#include "wsg/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wsg/numfmt.hpp"

namespace wsg::plots {

namespace {

struct Series {
  std::string name;
  const char* color;
  std::vector<double> x, y; // NaN-free, same length
};

std::string fnum(double v, int decimals = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", decimals + 2, v);
  return buf;
}

// Minimal line chart. Fixed canvas, linear axes, one polyline per
// series, legend in the top-right corner.
std::string render_chart(const std::string& title, const std::string& xlabel,
                         const std::string& ylabel, const std::vector<Series>& series) {
  const double W = 640, H = 400;
  const double L = 64, R = 24, T = 40, B = 48; // margins
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const Series& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (first) throw std::runtime_error("plot: no data points");
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  ymin = std::min(ymin, 0.0); // anchor losses/accuracies at zero
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  svg << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">"
      << title << "</text>\n";
  // Axes.
  svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    double fx = xmin + (xmax - xmin) * i / ticks;
    double fy = ymin + (ymax - ymin) * i / ticks;
    svg << "<line x1=\"" << px(fx) << "\" y1=\"" << H - B << "\" x2=\"" << px(fx) << "\" y2=\""
        << H - B + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << px(fx) << "\" y=\"" << H - B + 18
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << fnum(fx)
        << "</text>\n";
    svg << "<line x1=\"" << L - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << L << "\" y2=\""
        << py(fy) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << L - 8 << "\" y=\"" << py(fy) + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << fnum(fy)
        << "</text>\n";
  }
  svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << xlabel
      << "</text>\n";
  svg << "<text x=\"16\" y=\"" << (T + H - B) / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << ylabel << "</text>\n";
  // Series + legend.
  double ly = T + 8;
  for (const Series& s : series) {
    if (s.x.empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i)
      svg << px(s.x[i]) << "," << py(s.y[i]) << (i + 1 < s.x.size() ? " " : "");
    svg << "\"/>\n";
    svg << "<line x1=\"" << W - R - 130 << "\" y1=\"" << ly << "\" x2=\"" << W - R - 110
        << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << W - R - 104 << "\" y=\"" << ly + 4
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << s.name << "</text>\n";
    ly += 16;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

MetricLog parse_metric_log(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error(path + ": cannot open metric log");
  MetricLog log;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    // Split on tabs by hand: stream extraction refuses "nan", which is
    // exactly what the val_acc column holds between validation points.
    std::vector<std::string> cols;
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 7)
      throw std::runtime_error(path + ": malformed metric line " + std::to_string(lineno) +
                               " (expected 7 tab-separated columns, got " +
                               std::to_string(cols.size()) + ")");
    char* end = nullptr;
    long long it = std::strtoll(cols[0].c_str(), &end, 10);
    if (end == cols[0].c_str() || *end != '\0')
      throw std::runtime_error(path + ": malformed iteration on line " + std::to_string(lineno));
    double v[6];
    for (int c = 0; c < 6; ++c) {
      const std::string& s = cols[size_t(c) + 1];
      v[c] = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0')
        throw std::runtime_error(path + ": malformed number on line " + std::to_string(lineno));
    }
    log.iter.push_back(it);
    log.l_rec.push_back(v[0]);
    log.l_reg.push_back(v[1]);
    log.l_rel.push_back(v[2]);
    log.l_rank.push_back(v[3]);
    log.total.push_back(v[4]);
    log.val_acc.push_back(v[5]);
  }
  if (log.iter.empty()) throw std::runtime_error(path + ": metric log is empty");
  return log;
}

std::string threshold_curve_csv(const metrics::MetricsReport& report) {
  if (report.acc_at.empty()) throw std::runtime_error("plot: report has no thresholds");
  std::string out = "threshold,accuracy\n";
  for (const auto& [t, v] : report.acc_at)
    out += format_double(t) + "," + format_double(v) + "\n";
  return out;
}

std::string threshold_curve_svg(const metrics::MetricsReport& report) {
  if (report.acc_at.empty()) throw std::runtime_error("plot: report has no thresholds");
  Series s{"accuracy", "#1f77b4", {}, {}};
  for (const auto& [t, v] : report.acc_at) {
    s.x.push_back(t);
    s.y.push_back(v);
  }
  return render_chart("Grounding accuracy vs IoU threshold", "IoU threshold", "accuracy", {s});
}

std::string loss_curves_csv(const MetricLog& log) {
  std::string out = "iter,l_rec,l_reg,l_rel,l_rank,total,val_acc\n";
  for (size_t i = 0; i < log.iter.size(); ++i) {
    out += std::to_string(log.iter[i]) + "," + format_double(log.l_rec[i]) + "," +
           format_double(log.l_reg[i]) + "," + format_double(log.l_rel[i]) + "," +
           format_double(log.l_rank[i]) + "," + format_double(log.total[i]) + "," +
           format_double(log.val_acc[i]) + "\n";
  }
  return out;
}

std::string loss_curves_svg(const MetricLog& log) {
  if (log.iter.empty()) throw std::runtime_error("plot: metric log is empty");
  auto mk = [&](const std::string& name, const char* color,
                const std::vector<double>& ys) {
    Series s{name, color, {}, {}};
    for (size_t i = 0; i < ys.size(); ++i)
      if (std::isfinite(ys[i])) {
        s.x.push_back(double(log.iter[i]));
        s.y.push_back(ys[i]);
      }
    return s;
  };
  std::vector<Series> series = {
      mk("l_rec", "#1f77b4", log.l_rec),   mk("l_reg", "#ff7f0e", log.l_reg),
      mk("l_rel", "#2ca02c", log.l_rel),   mk("l_rank", "#d62728", log.l_rank),
      mk("total", "#9467bd", log.total),   mk("val_acc", "#8c564b", log.val_acc),
  };
  return render_chart("Training losses", "iteration", "value", series);
}

}  // namespace wsg::plots

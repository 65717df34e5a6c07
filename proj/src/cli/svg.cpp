#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "unilab/cli.hpp"
#include "unilab/error.hpp"

namespace unilab::cli {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;  // legend column
constexpr double kTop = 40.0;
constexpr double kBottom = 70.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};

std::string fixed2(double v) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v, std::chars_format::fixed, 2);
  return std::string(buffer, result.ptr);
}

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;     // clamped delta_hat
  double low = 0.0;   // clamped ci_low
  double high = 0.0;
  bool clamped = false;
};

struct Series {
  std::string tester;
  std::vector<PlotPoint> points;
};

// One point per (tester, n): the side with the larger failure rate.
std::vector<Series> collect_series(const std::vector<RunRow>& rows) {
  std::vector<Series> series;
  std::map<std::string, std::map<std::int64_t, RunRow>> worst;
  for (const auto& row : rows) {
    if (std::none_of(series.begin(), series.end(), [&](const Series& s) { return s.tester == row.tester; })) {
      series.push_back({row.tester, {}});
    }
    auto& slot = worst[row.tester];
    auto it = slot.find(row.n);
    if (it == slot.end() || row.delta_hat > it->second.delta_hat) slot[row.n] = row;
  }
  for (auto& s : series) {
    for (const auto& [n, row] : worst[s.tester]) {
      const double floor = 1.0 / (2.0 * static_cast<double>(std::max<std::int64_t>(row.trials, 1)));
      PlotPoint p;
      p.x = row.x_axis;
      p.clamped = row.delta_hat <= 0.0;
      p.y = std::max(row.delta_hat, floor);
      p.low = std::max(row.ci_low, floor);
      p.high = std::max(row.ci_high, p.y);
      s.points.push_back(p);
    }
    std::sort(s.points.begin(), s.points.end(), [](const PlotPoint& a, const PlotPoint& b) { return a.x < b.x; });
  }
  return series;
}

}  // namespace

std::string render_svg(const std::vector<RunRow>& rows) {
  require(!rows.empty(), ErrorCode::kInvalidParameter, "no rows to plot");
  const auto series = collect_series(rows);

  double x_min = INFINITY, x_max = -INFINITY, y_min = INFINITY, y_max = -INFINITY;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      x_min = std::min(x_min, p.x);
      x_max = std::max(x_max, p.x);
      y_min = std::min(y_min, p.low);
      y_max = std::max(y_max, p.high);
    }
  }
  if (x_max - x_min <= 0.0) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  const double decade_lo = std::floor(std::log10(y_min));
  double decade_hi = std::ceil(std::log10(y_max));
  if (decade_hi <= decade_lo) decade_hi = decade_lo + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double y) { return kTop + (decade_hi - std::log10(y)) / (decade_hi - decade_lo) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  svg << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  svg << "<line x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(kTop + plot_h) << "\" x2=\"" << fixed2(kLeft + plot_w)
      << "\" y2=\"" << fixed2(kTop + plot_h) << "\"/>\n";
  svg << "<line x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(kTop) << "\" x2=\"" << fixed2(kLeft) << "\" y2=\""
      << fixed2(kTop + plot_h) << "\"/>\n";
  svg << "</g>\n";

  svg << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (double d = decade_lo; d <= decade_hi + 0.5; d += 1.0) {
    const double y = sy(std::pow(10.0, d));
    svg << "<line x1=\"" << fixed2(kLeft - 5) << "\" y1=\"" << fixed2(y) << "\" x2=\"" << fixed2(kLeft) << "\" y2=\""
        << fixed2(y) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fixed2(kLeft - 8) << "\" y=\"" << fixed2(y + 4) << "\" text-anchor=\"end\">1e"
        << static_cast<int>(d) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    const double x = sx(xv);
    svg << "<line x1=\"" << fixed2(x) << "\" y1=\"" << fixed2(kTop + plot_h) << "\" x2=\"" << fixed2(x) << "\" y2=\""
        << fixed2(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fixed2(x) << "\" y=\"" << fixed2(kTop + plot_h + 20) << "\" text-anchor=\"middle\">"
        << fixed2(xv) << "</text>\n";
  }
  svg << "<text x=\"" << fixed2(kLeft + plot_w / 2) << "\" y=\"" << fixed2(kHeight - 20)
      << "\" text-anchor=\"middle\">n^2 eps^4 / m</text>\n";
  svg << "<text x=\"20\" y=\"" << fixed2(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << fixed2(kTop + plot_h / 2) << ")\">failure probability</text>\n";
  svg << "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    svg << "<g class=\"series\" data-tester=\"" << s.tester << "\">\n";
    svg << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (const auto& p : s.points) svg << fixed2(sx(p.x)) << ',' << fixed2(sy(p.high)) << ' ';
    for (auto it = s.points.rbegin(); it != s.points.rend(); ++it) {
      svg << fixed2(sx(it->x)) << ',' << fixed2(sy(it->low)) << ' ';
    }
    svg << "\"/>\n";
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.points.size(); ++k) {
      if (k) svg << ' ';
      svg << fixed2(sx(s.points[k].x)) << ',' << fixed2(sy(s.points[k].y));
    }
    svg << "\"/>\n";
    for (const auto& p : s.points) {
      if (!p.clamped) continue;
      svg << "<circle class=\"clamped\" cx=\"" << fixed2(sx(p.x)) << "\" cy=\"" << fixed2(sy(p.y))
          << "\" r=\"4\" fill=\"white\" stroke=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 20.0 * static_cast<double>(i);
    svg << "<rect x=\"" << fixed2(kWidth - kRight + 15) << "\" y=\"" << fixed2(ly) << "\" width=\"14\" height=\"4\" fill=\""
        << color << "\"/>\n";
    svg << "<text x=\"" << fixed2(kWidth - kRight + 35) << "\" y=\"" << fixed2(ly + 6)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.tester << "</text>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace unilab::cli

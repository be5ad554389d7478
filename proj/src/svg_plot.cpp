/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cbfdl/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cbfdl/error.hpp"
#include "cbfdl/predictor.hpp"

namespace cbfdl {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr std::size_t kMaxPoints = 2000;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

double niceStep(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

}  // namespace

std::string lineChartSvg(const std::string& title, const std::string& xLabel,
                         const std::string& yLabel, const std::vector<PlotSeries>& series,
                         bool equalAspect) {
  Range xr;
  Range yr;
  for (const auto& s : series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.pad();
  yr.pad();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  if (equalAspect) {
    const double scale = std::max((xr.hi - xr.lo) / pw, (yr.hi - yr.lo) / ph);
    const double cx = 0.5 * (xr.lo + xr.hi);
    const double cy = 0.5 * (yr.lo + yr.hi);
    xr.lo = cx - 0.5 * scale * pw;
    xr.hi = cx + 0.5 * scale * pw;
    yr.lo = cy - 0.5 * scale * ph;
    yr.hi = cy + 0.5 * scale * ph;
  }
  auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto sy = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  const double xs = niceStep(xr.hi - xr.lo);
  for (double v = std::ceil(xr.lo / xs) * xs; v <= xr.hi; v += xs) {
    os << "<line x1=\"" << sx(v) << "\" y1=\"" << kTop + ph << "\" x2=\"" << sx(v) << "\" y2=\""
       << kTop + ph + 5 << "\" stroke=\"black\"/><text x=\"" << sx(v) << "\" y=\""
       << kTop + ph + 18 << "\" text-anchor=\"middle\">" << fmt(std::abs(v) < 1e-12 ? 0.0 : v)
       << "</text>\n";
  }
  const double ys = niceStep(yr.hi - yr.lo);
  for (double v = std::ceil(yr.lo / ys) * ys; v <= yr.hi; v += ys) {
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << sy(v) << "\" x2=\"" << kLeft << "\" y2=\""
       << sy(v) << "\" stroke=\"black\"/><text x=\"" << kLeft - 8 << "\" y=\"" << sy(v) + 4
       << "\" text-anchor=\"end\">" << fmt(std::abs(v) < 1e-12 ? 0.0 : v) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
     << "\" text-anchor=\"middle\">" << escape(xLabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kTop + ph / 2 << ")\">" << escape(yLabel) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    const std::size_t stride = std::max<std::size_t>(1, n / kMaxPoints);
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\"";
    if (s.dashed) os << " stroke-dasharray=\"6 4\"";
    os << " points=\"";
    for (std::size_t i = 0; i < n; i += stride) os << sx(s.x[i]) << ',' << sy(s.y[i]) << ' ';
    if (n > 0 && (n - 1) % stride != 0) os << sx(s.x[n - 1]) << ',' << sy(s.y[n - 1]);
    os << "\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << kLeft + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 34
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\""
       << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/><text x=\"" << kLeft + pw + 40
       << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<PlotSeries> criticalDistanceSeries(const Scenario& scenario,
                                               const std::vector<double>& times) {
  std::vector<PlotSeries> out;
  const auto& robots = scenario.robots;
  if (robots.size() != 2 && robots.size() != 3) return out;
  for (const auto& r : robots) {
    PlotSeries s;
    s.label = "beta_+ robot " + std::to_string(r.id);
    s.dashed = true;
    const double dg = (r.position - r.goal).norm();
    ThreeRobotCanonical c3;
    c3.d_g = dg;
    c3.k_p = r.gain;
    c3.safety = scenario.safety;
    for (double t : times) {
      s.x.push_back(t);
      s.y.push_back(robots.size() == 2 ? betaPlusTimed(dg, r.gain, t, scenario.safety)
                                       : threeRobotBetaPlusTimed(c3, t));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string distancePlotSvg(const SimTrace& trace, const Scenario& scenario) {
  std::vector<PlotSeries> series;
  for (std::size_t p = 0; p < trace.pairs.size(); ++p) {
    const auto [i, j] = trace.pairs[p];
    series.push_back({"|p" + std::to_string(trace.robot_ids[i]) + " - p" +
                          std::to_string(trace.robot_ids[j]) + "|",
                      trace.times, trace.distances[p], false});
  }
  for (auto& s : criticalDistanceSeries(scenario, trace.times)) series.push_back(std::move(s));
  if (!trace.times.empty()) {
    series.push_back({"d_s", {trace.times.front(), trace.times.back()},
                      {scenario.safety.d_s, scenario.safety.d_s}, true});
  }
  return lineChartSvg("Pairwise distance", "t [s]", "distance [m]", series);
}

std::string pathPlotSvg(const SimTrace& trace, const Scenario& scenario) {
  std::vector<PlotSeries> series;
  for (std::size_t i = 0; i < trace.robot_ids.size(); ++i) {
    PlotSeries s;
    s.label = "robot " + std::to_string(trace.robot_ids[i]);
    for (const auto& row : trace.samples) {
      s.x.push_back(row[i].position.x);
      s.y.push_back(row[i].position.y);
    }
    series.push_back(std::move(s));
  }
  for (const auto& r : scenario.robots) {
    // Short dashed segment from start to goal marks the nominal straight path.
    series.push_back({"goal line " + std::to_string(r.id), {r.position.x, r.goal.x},
                      {r.position.y, r.goal.y}, true});
  }
  return lineChartSvg("Robot paths", "x [m]", "y [m]", series, true);
}

void writePlots(const SimTrace& trace, const Scenario& scenario, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& [name, body] : {std::pair{kDistancePlot, distancePlotSvg(trace, scenario)},
                                   std::pair{kPathPlot, pathPlotSvg(trace, scenario)}}) {
    std::ofstream out(dir / name);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / name).string());
    out << body;
  }
}

}  // namespace cbfdl

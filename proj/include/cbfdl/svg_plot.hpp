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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cbfdl/model.hpp"
#include "cbfdl/simulator.hpp"

namespace cbfdl {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

inline constexpr const char* kDistancePlot = "distances.svg";
inline constexpr const char* kPathPlot = "paths.svg";

/// Line chart with axes, ticks and a legend.
std::string lineChartSvg(const std::string& title, const std::string& xLabel,
                         const std::string& yLabel, const std::vector<PlotSeries>& series,
                         bool equalAspect = false);

/// Critical-distance curves beta_+(t) per robot for two- and three-robot
/// scenarios (empty otherwise), using each robot's initial goal distance.
std::vector<PlotSeries> criticalDistanceSeries(const Scenario& scenario,
                                               const std::vector<double>& times);

std::string distancePlotSvg(const SimTrace& trace, const Scenario& scenario);
std::string pathPlotSvg(const SimTrace& trace, const Scenario& scenario);

/// Writes distances.svg and paths.svg into dir.
void writePlots(const SimTrace& trace, const Scenario& scenario, const std::filesystem::path& dir);

}  // namespace cbfdl

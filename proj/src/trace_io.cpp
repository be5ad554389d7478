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

#include "cbfdl/trace_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "cbfdl/error.hpp"

namespace cbfdl {
namespace fs = std::filesystem;

std::string formatReal(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::ofstream openOut(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + p.string());
  return out;
}

std::ifstream openIn(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + p.string());
  return in;
}

std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parseReal(const std::string& s, const fs::path& file) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorKind::Io, file.string() + ": bad number '" + s + "'");
  }
  return v;
}

int parseInt(const std::string& s, const fs::path& file) {
  const double v = parseReal(s, file);
  return static_cast<int>(v);
}

std::string joinIds(const std::vector<int>& ids) {
  std::string out;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) out += ';';
    out += std::to_string(ids[k]);
  }
  return out;
}

}  // namespace

void exportTrace(const SimTrace& trace, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

  {
    auto out = openOut(dir / kTraceFile);
    out << "t,robot_id,px,py,ux,uy,active_ids";
    for (int j : trace.robot_ids) out << ",mu_" << j;
    out << '\n';
    for (std::size_t k = 0; k < trace.size(); ++k) {
      for (std::size_t i = 0; i < trace.robot_ids.size(); ++i) {
        const auto& s = trace.samples[k][i];
        out << formatReal(trace.times[k]) << ',' << trace.robot_ids[i] << ','
            << formatReal(s.position.x) << ',' << formatReal(s.position.y) << ','
            << formatReal(s.control.x) << ',' << formatReal(s.control.y) << ','
            << joinIds(s.active);
        for (int j : trace.robot_ids) {
          out << ',';
          if (j == trace.robot_ids[i]) continue;
          const auto it = s.multipliers.find(j);
          out << formatReal(it == s.multipliers.end() ? 0.0 : it->second);
        }
        out << '\n';
      }
    }
    if (!out) throw Error(ErrorKind::Io, "write failed for trace.csv");
  }
  {
    auto out = openOut(dir / kDistanceFile);
    out << "t,i,j,dist\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
      for (std::size_t p = 0; p < trace.pairs.size(); ++p) {
        out << formatReal(trace.times[k]) << ',' << trace.pairs[p].first << ','
            << trace.pairs[p].second << ',' << formatReal(trace.distances[p][k]) << '\n';
      }
    }
    if (!out) throw Error(ErrorKind::Io, "write failed for distances.csv");
  }
  {
    auto out = openOut(dir / kEventFile);
    out << "t,kind,robot,neighbor\n";
    for (const auto& e : trace.events) {
      out << formatReal(e.time) << ',' << toString(e.kind) << ',';
      if (e.robot != 0) out << e.robot;
      out << ',';
      if (e.neighbor) out << *e.neighbor;
      out << '\n';
    }
    if (!out) throw Error(ErrorKind::Io, "write failed for events.csv");
  }
}

SimTrace importTrace(const fs::path& dir) {
  SimTrace trace;
  std::string line;

  const fs::path tracePath = dir / kTraceFile;
  auto in = openIn(tracePath);
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, "empty trace.csv");
  const auto header = splitCsv(line);
  if (header.size() < 7 || header[0] != "t") throw Error(ErrorKind::Io, "bad trace.csv header");
  for (std::size_t c = 7; c < header.size(); ++c) {
    trace.robot_ids.push_back(parseInt(header[c].substr(3), tracePath));
  }
  const std::size_t n = trace.robot_ids.size();
  std::vector<RobotSample> row;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = splitCsv(line);
    if (cells.size() != 7 + n) throw Error(ErrorKind::Io, "trace.csv: bad column count");
    const double t = parseReal(cells[0], tracePath);
    if (row.empty()) trace.times.push_back(t);
    RobotSample s;
    const int id = parseInt(cells[1], tracePath);
    s.position = {parseReal(cells[2], tracePath), parseReal(cells[3], tracePath)};
    s.control = {parseReal(cells[4], tracePath), parseReal(cells[5], tracePath)};
    std::istringstream act(cells[6]);
    std::string tok;
    while (std::getline(act, tok, ';')) s.active.push_back(parseInt(tok, tracePath));
    for (std::size_t c = 0; c < n; ++c) {
      if (trace.robot_ids[c] == id) continue;
      s.multipliers[trace.robot_ids[c]] = parseReal(cells[7 + c], tracePath);
    }
    row.push_back(std::move(s));
    if (row.size() == n) {
      trace.samples.push_back(std::move(row));
      row.clear();
    }
  }
  if (!row.empty()) throw Error(ErrorKind::Io, "trace.csv: truncated sample");

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) trace.pairs.emplace_back(trace.robot_ids[i], trace.robot_ids[j]);
  }
  trace.distances.assign(trace.pairs.size(), {});
  const fs::path distPath = dir / kDistanceFile;
  auto din = openIn(distPath);
  std::getline(din, line);
  std::size_t p = 0;
  while (std::getline(din, line)) {
    if (line.empty()) continue;
    const auto cells = splitCsv(line);
    if (cells.size() != 4) throw Error(ErrorKind::Io, "distances.csv: bad column count");
    trace.distances[p].push_back(parseReal(cells[3], distPath));
    p = (p + 1) % std::max<std::size_t>(trace.pairs.size(), 1);
  }

  const fs::path evPath = dir / kEventFile;
  if (fs::exists(evPath)) {
    auto ein = openIn(evPath);
    std::getline(ein, line);
    while (std::getline(ein, line)) {
      if (line.empty()) continue;
      const auto cells = splitCsv(line);
      if (cells.size() != 4) throw Error(ErrorKind::Io, "events.csv: bad column count");
      Event e;
      e.time = parseReal(cells[0], evPath);
      e.kind = eventKindFromString(cells[1]);
      e.robot = cells[2].empty() ? 0 : parseInt(cells[2], evPath);
      if (!cells[3].empty()) e.neighbor = parseInt(cells[3], evPath);
      trace.events.push_back(e);
    }
  }
  return trace;
}

}  // namespace cbfdl

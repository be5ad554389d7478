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

#include "cbfdl/scenario_file.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "cbfdl/error.hpp"

namespace cbfdl {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::Validation, path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void onlyKeys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) fail(join(path, item.key()), "unknown key");
  }
}

const json& need(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(join(path, key), "missing");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

Vec2 vec2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [x, y]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

json toJson(const Vec2& v) { return json::array({v.x, v.y}); }

template <typename F>
auto checked(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Validation || e.kind() == ErrorKind::PreconditionViolated) {
      throw Error(e.kind(), path + ": " + e.what());
    }
    throw;
  }
}

json parseJson(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Validation, std::string("<root>: malformed JSON: ") + e.what());
  }
}

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ScenarioFile parseScenario(const std::string& text) {
  const json root = parseJson(text);
  onlyKeys(root, "", {"schema_version", "robots", "safety", "sim", "detection"});
  const int version = integer(need(root, "", "schema_version"), "schema_version");
  if (version != kSchemaVersion) {
    fail("schema_version", "unsupported version " + std::to_string(version));
  }

  ScenarioFile out;
  const json& robots = need(root, "", "robots");
  if (!robots.is_array() || robots.empty()) fail("robots", "expected a non-empty array");
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const std::string p = "robots[" + std::to_string(i) + "]";
    const json& r = robots[i];
    onlyKeys(r, p, {"id", "position", "goal", "gain"});
    RobotState s;
    s.id = integer(need(r, p, "id"), p + ".id");
    s.position = vec2(need(r, p, "position"), p + ".position");
    s.goal = vec2(need(r, p, "goal"), p + ".goal");
    s.gain = number(need(r, p, "gain"), p + ".gain");
    out.scenario.robots.push_back(s);
  }

  const json& safety = need(root, "", "safety");
  onlyKeys(safety, "safety", {"d_s", "gamma"});
  out.scenario.safety.d_s = number(need(safety, "safety", "d_s"), "safety.d_s");
  out.scenario.safety.gamma = number(need(safety, "safety", "gamma"), "safety.gamma");

  if (const auto it = root.find("sim"); it != root.end()) {
    onlyKeys(*it, "sim", {"dt", "horizon", "integrator", "record_every"});
    out.sim.dt = number(need(*it, "sim", "dt"), "sim.dt");
    out.sim.horizon = number(need(*it, "sim", "horizon"), "sim.horizon");
    const json& integ = need(*it, "sim", "integrator");
    if (!integ.is_string()) fail("sim.integrator", "expected \"euler\" or \"rk4\"");
    out.sim.integrator =
        checked("sim.integrator", [&] { return integratorFromString(integ.get<std::string>()); });
    if (const auto re = it->find("record_every"); re != it->end()) {
      out.sim.record_every = integer(*re, "sim.record_every");
    }
  }

  if (const auto it = root.find("detection"); it != root.end()) {
    onlyKeys(*it, "detection", {"eps_u", "eps_goal", "persistence"});
    out.detection.eps_u = number(need(*it, "detection", "eps_u"), "detection.eps_u");
    out.detection.eps_goal = number(need(*it, "detection", "eps_goal"), "detection.eps_goal");
    out.detection.persistence =
        integer(need(*it, "detection", "persistence"), "detection.persistence");
  }

  checked("safety", [&] { out.scenario.safety.validate(); });
  checked("robots", [&] { out.scenario.validate(); });
  checked("sim", [&] { out.sim.validate(); });
  checked("detection", [&] { out.detection.validate(); });
  return out;
}

ScenarioFile loadScenario(const std::filesystem::path& path) {
  return parseScenario(readFile(path));
}

std::string emitScenario(const ScenarioFile& file) {
  json robots = json::array();
  for (const auto& r : file.scenario.robots) {
    robots.push_back({{"id", r.id},
                      {"position", toJson(r.position)},
                      {"goal", toJson(r.goal)},
                      {"gain", r.gain}});
  }
  const json root = {
      {"schema_version", kSchemaVersion},
      {"robots", robots},
      {"safety", {{"d_s", file.scenario.safety.d_s}, {"gamma", file.scenario.safety.gamma}}},
      {"sim",
       {{"dt", file.sim.dt},
        {"horizon", file.sim.horizon},
        {"integrator", toString(file.sim.integrator)},
        {"record_every", file.sim.record_every}}},
      {"detection",
       {{"eps_u", file.detection.eps_u},
        {"eps_goal", file.detection.eps_goal},
        {"persistence", file.detection.persistence}}},
  };
  return root.dump(2) + "\n";
}

void saveScenario(const ScenarioFile& file, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << emitScenario(file);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

const char* toString(CanonicalKind kind) {
  return kind == CanonicalKind::TwoRobotCollinear ? "two_robot_collinear"
                                                  : "three_robot_antipodal";
}

CanonicalSpec builtinS1() {
  CanonicalSpec s;
  s.kind = CanonicalKind::TwoRobotCollinear;
  s.two.d_init = 2.0;
  s.two.d_g1 = 3.0;
  s.two.d_g2 = 4.0;
  s.two.k_p1 = 0.25;
  s.two.k_p2 = 0.375;
  s.two.alpha = 0.0;
  s.two.safety = {0.5, 5.0};
  return s;
}

CanonicalSpec builtinS2() {
  CanonicalSpec s;
  s.kind = CanonicalKind::ThreeRobotAntipodal;
  s.three.d_init = 3.0;
  s.three.d_g = 3.0;
  s.three.k_p = 1.0;
  s.three.alpha = 0.0;
  s.three.safety = {0.5, 5.0};
  return s;
}

CanonicalSpec parseCanonical(const std::string& text) {
  const json root = parseJson(text);
  const json& kind = need(root, "", "kind");
  if (!kind.is_string()) fail("kind", "expected a string");
  const std::string k = kind.get<std::string>();
  CanonicalSpec s;
  auto opt = [&](const char* key, double fallback) {
    const auto it = root.find(key);
    return it == root.end() ? fallback : number(*it, key);
  };
  auto req = [&](const char* key) { return number(need(root, "", key), key); };
  Vec2 base;
  if (const auto it = root.find("base"); it != root.end()) base = vec2(*it, "base");
  if (k == "two_robot_collinear") {
    onlyKeys(root, "", {"kind", "d_init", "d_g1", "d_g2", "k_p1", "k_p2", "gamma", "d_s", "alpha",
                        "base"});
    s.kind = CanonicalKind::TwoRobotCollinear;
    s.two = {req("d_init"), req("d_g1"), req("d_g2"), req("k_p1"), req("k_p2"),
             opt("alpha", 0.0), base, {req("d_s"), req("gamma")}};
  } else if (k == "three_robot_antipodal") {
    onlyKeys(root, "", {"kind", "d_init", "d_g", "k_p", "gamma", "d_s", "alpha", "base"});
    s.kind = CanonicalKind::ThreeRobotAntipodal;
    s.three = {req("d_init"), req("d_g"), req("k_p"), opt("alpha", 0.0), base,
               {req("d_s"), req("gamma")}};
  } else {
    fail("kind", "expected two_robot_collinear or three_robot_antipodal");
  }
  return s;
}

CanonicalSpec loadCanonical(const std::string& nameOrPath) {
  if (nameOrPath == "S1") return builtinS1();
  if (nameOrPath == "S2") return builtinS2();
  return parseCanonical(readFile(nameOrPath));
}

std::string emitCanonical(const CanonicalSpec& spec) {
  json root;
  root["kind"] = toString(spec.kind);
  if (spec.kind == CanonicalKind::TwoRobotCollinear) {
    const auto& c = spec.two;
    root.update({{"d_init", c.d_init}, {"d_g1", c.d_g1}, {"d_g2", c.d_g2}, {"k_p1", c.k_p1},
                 {"k_p2", c.k_p2}, {"gamma", c.safety.gamma}, {"d_s", c.safety.d_s},
                 {"alpha", c.alpha}, {"base", toJson(c.base)}});
  } else {
    const auto& c = spec.three;
    root.update({{"d_init", c.d_init}, {"d_g", c.d_g}, {"k_p", c.k_p},
                 {"gamma", c.safety.gamma}, {"d_s", c.safety.d_s}, {"alpha", c.alpha},
                 {"base", toJson(c.base)}});
  }
  return root.dump(2) + "\n";
}

Scenario twoRobotScenario(const TwoRobotCanonical& c) {
  const Vec2 e = unitVector(c.alpha);
  const Vec2 p1 = c.base;
  const Vec2 p2 = p1 + e * c.d_init;
  Scenario s;
  s.safety = c.safety;
  s.robots = {{1, p1, p1 + e * c.d_g1, c.k_p1}, {2, p2, p2 - e * c.d_g2, c.k_p2}};
  return s;
}

Scenario threeRobotScenario(const ThreeRobotCanonical& c) {
  const Vec2 p1 = c.base;
  const Vec2 p2 = p1 + unitVector(c.alpha) * c.d_init;
  const Vec2 p3 = p2 + unitVector(c.alpha + 2.0 * kPi / 3.0) * c.d_init;
  const Vec2 centroid = (p1 + p2 + p3) / 3.0;
  const double scale = kSqrt3 * c.d_g / c.d_init;
  Scenario s;
  s.safety = c.safety;
  int id = 1;
  for (const Vec2& p : {p1, p2, p3}) {
    s.robots.push_back({id++, p, p + (centroid - p) * scale, c.k_p});
  }
  return s;
}

ScenarioFile generateCanonical(const CanonicalSpec& spec) {
  ScenarioFile out;
  if (spec.kind == CanonicalKind::TwoRobotCollinear) {
    spec.two.validate();
    out.scenario = twoRobotScenario(spec.two);
  } else {
    spec.three.validate();
    out.scenario = threeRobotScenario(spec.three);
  }
  out.sim.horizon = 30.0;
  out.scenario.validate();
  return out;
}

ScenarioFile loadScenarioOrCanonical(const std::string& nameOrPath) {
  if (nameOrPath == "S1" || nameOrPath == "S2") {
    return generateCanonical(loadCanonical(nameOrPath));
  }
  const std::string text = readFile(nameOrPath);
  const json root = parseJson(text);
  if (root.is_object() && root.contains("kind")) return generateCanonical(parseCanonical(text));
  return parseScenario(text);
}

}  // namespace cbfdl

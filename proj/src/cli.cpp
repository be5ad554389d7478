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

#include "cbfdl/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbfdl/deadlock.hpp"
#include "cbfdl/enumeration.hpp"
#include "cbfdl/error.hpp"
#include "cbfdl/predictor.hpp"
#include "cbfdl/resolution.hpp"
#include "cbfdl/scenario_file.hpp"
#include "cbfdl/simulator.hpp"
#include "cbfdl/svg_plot.hpp"
#include "cbfdl/trace_io.hpp"

namespace cbfdl {
namespace {

constexpr const char* kScenarioCopy = "scenario.json";

std::string real(double v) { return formatReal(v); }

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Overrides {
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<std::string> integrator;

  void add(CLI::App* cmd) {
    cmd->add_option("--dt", dt, "Override the integration step [s]");
    cmd->add_option("--horizon", horizon, "Override the horizon [s]");
    cmd->add_option("--integrator", integrator, "Override the integrator (euler|rk4)");
  }
  void apply(SimConfig& sim) const {
    if (dt) sim.dt = *dt;
    if (horizon) sim.horizon = *horizon;
    if (integrator) sim.integrator = integratorFromString(*integrator);
    sim.validate();
  }
};

int exitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation:
    case ErrorKind::InvalidInput:
    case ErrorKind::PreconditionViolated:
    case ErrorKind::AssumptionViolated:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

void printSimulation(std::ostream& out, const SimTrace& trace) {
  const auto& last = trace.samples.back();
  double umax = 0.0;
  for (const auto& s : last) umax = std::max(umax, s.control.norm());
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& series : trace.distances) {
    for (double d : series) dmin = std::min(dmin, d);
  }
  out << "samples=" << trace.size() << " t_end=" << fixed(trace.times.back(), 3)
      << " min_distance=" << real(dmin) << " final_max_control=" << real(umax) << '\n';
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::ConstraintDeactivated) continue;
    out << "event t=" << fixed(e.time, 3) << ' ' << toString(e.kind);
    if (e.robot != 0) out << " robot=" << e.robot;
    if (e.neighbor) out << " neighbor=" << *e.neighbor;
    out << '\n';
  }
}

void printTwoRobotPrediction(std::ostream& out, const TwoRobotCanonical& c, int samples) {
  const PhaseTimeline p = predictTwoRobot(c);
  out << "t1=" << real(p.t1) << " t2=" << real(*p.t2) << " first_active=" << p.first_active << '\n';
  out << "D(t1)=" << real(p.d_at_t1) << " D(t2)=" << real(*p.d_at_t2)
      << " limit=" << real(p.limit_distance) << '\n';
  out << "t,nominal,beta1,beta2,model\n";
  const double until = 2.0 * *p.t2 + 1.0;
  for (int k = 0; k < samples; ++k) {
    const double t = until * k / std::max(1, samples - 1);
    const double model = t <= p.t1    ? nominalDistanceTwo(c, t)
                         : t <= *p.t2 ? phase2Distance(c, p.t1, t)
                                      : phase3ClosedForm(*p.d_at_t2, *p.t2, t, c.safety);
    out << fixed(t, 4) << ',' << fixed(nominalDistanceTwo(c, t)) << ','
        << fixed(betaPlusTimed(c.d_g1, c.k_p1, t, c.safety)) << ','
        << fixed(betaPlusTimed(c.d_g2, c.k_p2, t, c.safety)) << ',' << fixed(model) << '\n';
  }
}

void printThreeRobotPrediction(std::ostream& out, const ThreeRobotCanonical& c, int samples) {
  const PhaseTimeline p = predictThreeRobot(c);
  out << "t1=" << real(p.t1) << '\n';
  out << "D(t1)=" << real(p.d_at_t1) << " limit=" << real(p.limit_distance) << '\n';
  out << "t,nominal,beta,model\n";
  const double until = 2.0 * p.t1 + 1.0;
  for (int k = 0; k < samples; ++k) {
    const double t = until * k / std::max(1, samples - 1);
    const double model = t <= p.t1 ? threeRobotNominalDistance(c, t)
                                   : threeRobotPhase2ClosedForm(p.d_at_t1, p.t1, t, c.safety);
    out << fixed(t, 4) << ',' << fixed(threeRobotNominalDistance(c, t)) << ','
        << fixed(threeRobotBetaPlusTimed(c, t)) << ',' << fixed(model) << '\n';
  }
}

void printResolution(std::ostream& out, const ResolutionReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? real(*v) : std::string("-"); };
  out << "t_phase2=" << opt(r.t_phase2) << " t_phase3=" << opt(r.t_phase3)
      << " t_done=" << opt(r.t_done) << '\n';
  out << "min_distance=" << real(r.min_distance)
      << " phase2_distance_error=" << real(r.phase2_max_distance_error)
      << " phase2_centroid_drift=" << real(r.phase2_centroid_drift) << '\n';
  out << "phase3_monotone=" << (r.phase3_monotone ? "yes" : "no")
      << " phase3_max_decrease=" << real(r.phase3_max_decrease)
      << " phase3_closed_form_error=" << opt(r.phase3_closed_form_error)
      << " phase3_axis_offset=" << opt(r.phase3_axis_offset) << '\n';
  out << "deadlock_events_after_phase2=" << r.deadlock_events_after_phase2 << " final_goal_errors=";
  for (std::size_t i = 0; i < r.final_goal_errors.size(); ++i) {
    out << (i ? ";" : "") << real(r.final_goal_errors[i]);
  }
  out << '\n';
}

void printCertificates(std::ostream& out, const ScenarioFile& file, double tol) {
  const auto& robots = file.scenario.robots;
  const SystemDeadlock sys = systemDeadlock(robots, file.scenario.safety, tol);
  for (const auto& c : sys.certificates) {
    out << "robot=" << c.robot << " valid=" << (c.valid() ? "yes" : "no")
        << " min_distance=" << real(c.min_distance) << " active=";
    for (std::size_t k = 0; k < c.active.size(); ++k) out << (k ? ";" : "") << c.active[k];
    out << " mu=";
    bool first = true;
    for (const auto& [j, mu] : c.multipliers) {
      out << (first ? "" : ";") << j << ':' << real(mu);
      first = false;
    }
    out << " residual=" << real(c.stationarity_residual)
        << " at_goal=" << (c.at_goal ? "yes" : "no") << '\n';
  }
  out << "system_deadlock=" << (sys.deadlock ? "yes" : "no") << '\n';
  if (robots.size() == 3) {
    const auto pos = positionsOf(robots);
    out << "category=" << toString(classifyThreeRobot(pos, file.scenario.safety, tol)) << '\n';
  }
}

}  // namespace

int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"CBF-QP multi-robot deadlock toolkit"};
  app.require_subcommand(1);

  std::string scenarioArg;
  std::string outDir;
  Overrides overrides;

  auto* simulate = app.add_subcommand("simulate", "Run the CBF-QP closed loop and write CSV traces");
  simulate->add_option("scenario", scenarioArg, "Scenario file, canonical spec, S1 or S2")->required();
  simulate->add_option("--out", outDir, "Output directory")->required();
  overrides.add(simulate);

  int samples = 21;
  auto* predict = app.add_subcommand("predict", "Analytic phase timeline of a canonical scenario");
  predict->add_option("canonical", scenarioArg, "Canonical spec file, S1 or S2")->required();
  predict->add_option("--samples", samples, "Curve samples to print")->check(CLI::Range(2, 100000));

  int n = 4;
  std::uint64_t seed = 42;
  int restarts = 200;
  bool summaryOnly = false;
  auto* enumerate = app.add_subcommand("enumerate", "Count admissible deadlock contact graphs");
  enumerate->add_option("--n", n, "Number of robots")->required()->check(CLI::Range(1, 5));
  enumerate->add_option("--seed", seed, "Restart RNG seed");
  enumerate->add_option("--restarts", restarts, "Restarts per graph")->check(CLI::Range(1, 1000000));
  enumerate->add_flag("--summary", summaryOnly, "Print only the summary lines");

  double epsTheta = 1e-3;
  auto* resolve = app.add_subcommand("resolve", "Run the three-phase resolution supervisor");
  resolve->add_option("scenario", scenarioArg, "Scenario file, canonical spec, S1 or S2")->required();
  resolve->add_option("--out", outDir, "Output directory")->required();
  resolve->add_option("--eps-theta", epsTheta, "Phase-2 exit tolerance [rad]");
  overrides.add(resolve);

  double tol = kConstructedTol;
  auto* verify = app.add_subcommand("verify", "Deadlock membership certificates of a scenario state");
  verify->add_option("scenario", scenarioArg, "Scenario file, canonical spec, S1 or S2")->required();
  verify->add_option("--tol", tol, "Certificate tolerance");

  std::string traceDir;
  auto* plot = app.add_subcommand("plot", "Render distances.svg and paths.svg from a trace directory");
  plot->add_option("trace-dir", traceDir, "Directory written by simulate or resolve")->required();
  plot->add_option("--out", outDir, "Output directory (defaults to the trace directory)");

  std::string outFile;
  auto* generate = app.add_subcommand("generate", "Write the scenario file of a canonical spec");
  generate->add_option("canonical", scenarioArg, "Canonical spec file, S1 or S2")->required();
  generate->add_option("--out", outFile, "Scenario file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (simulate->parsed()) {
      ScenarioFile file = loadScenarioOrCanonical(scenarioArg);
      overrides.apply(file.sim);
      const SimTrace trace = run(file.scenario, file.sim, file.detection);
      exportTrace(trace, outDir);
      saveScenario(file, std::filesystem::path(outDir) / kScenarioCopy);
      printSimulation(out, trace);
    } else if (predict->parsed()) {
      const CanonicalSpec spec = loadCanonical(scenarioArg);
      if (spec.kind == CanonicalKind::TwoRobotCollinear) {
        printTwoRobotPrediction(out, spec.two, samples);
      } else {
        printThreeRobotPrediction(out, spec.three, samples);
      }
    } else if (enumerate->parsed()) {
      const auto report = countAdmissible(n, SafetyParams{1.0, 1.0}, {restarts, seed});
      const std::string text = formatReport(report);
      if (summaryOnly) {
        out << text.substr(text.rfind('\n', text.size() - 2) + 1);
      } else {
        out << text;
      }
    } else if (resolve->parsed()) {
      ScenarioFile file = loadScenarioOrCanonical(scenarioArg);
      overrides.apply(file.sim);
      ResolutionParams params;
      params.eps_theta = epsTheta;
      params.detection = file.detection;
      const auto result = runResolution(file.scenario, file.sim, params);
      exportTrace(result.trace, outDir);
      saveScenario(file, std::filesystem::path(outDir) / kScenarioCopy);
      printResolution(out, result.report);
    } else if (verify->parsed()) {
      printCertificates(out, loadScenarioOrCanonical(scenarioArg), tol);
    } else if (plot->parsed()) {
      const SimTrace trace = importTrace(traceDir);
      const ScenarioFile file = loadScenario(std::filesystem::path(traceDir) / kScenarioCopy);
      const std::string dest = outDir.empty() ? traceDir : outDir;
      writePlots(trace, file.scenario, dest);
      out << "wrote " << (std::filesystem::path(dest) / kDistancePlot).string() << " and "
          << (std::filesystem::path(dest) / kPathPlot).string() << '\n';
    } else if (generate->parsed()) {
      saveScenario(generateCanonical(loadCanonical(scenarioArg)), outFile);
      out << "wrote " << outFile << '\n';
    }
  } catch (const Error& e) {
    err << "error (" << toString(e.kind()) << "): " << e.what() << '\n';
    return exitCodeFor(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace cbfdl

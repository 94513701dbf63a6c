#include "epictrl/cli.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "epictrl/optimize.hpp"
#include "epictrl/pmp_verify.hpp"
#include "epictrl/policy.hpp"
#include "epictrl/viability.hpp"

namespace epictrl {

namespace {

using Json = nlohmann::ordered_json;

std::string g12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const Scenario& s) {
  Json j;
  j["name"] = s.name;
  j["beta"] = s.params.beta;
  j["gamma"] = s.params.gamma;
  j["u_max"] = s.params.u_max;
  j["i_M"] = s.params.i_M;
  j["lambda1"] = s.weights.lambda1;
  j["lambda2"] = s.weights.lambda2;
  j["s0"] = s.state0.s;
  j["i0"] = s.state0.i;
  j["horizon"] = s.horizon;
  j["step"] = s.step;
  return j;
}

Json to_json(const CostBreakdown& c) {
  return Json{{"control", number(c.control_part)},
              {"infection", number(c.infection_part)},
              {"tail", number(c.tail_part)},
              {"total", number(c.total)}};
}

Json to_json(const StructureKnobs& knobs) {
  if (const auto* b = std::get_if<BangBangKnobs>(&knobs))
    return Json{{"family", "BangBang"}, {"sigma0", b->sigma0}, {"sigma1", b->sigma1}};
  const auto& k = std::get<BoundaryArcKnobs>(knobs);
  return Json{{"family", "BoundaryArc"},
              {"tau0", k.tau0},
              {"delta_sing", number(k.delta_sing)},
              {"delta_post", k.delta_post}};
}

Json to_json(const PiecewiseControl& control) {
  Json arcs = Json::array();
  for (const auto& arc : control.arcs) {
    Json a{{"t_start", arc.t_start}, {"t_end", number(arc.t_end)}};
    if (const auto* c = std::get_if<ConstantLaw>(&arc.law)) {
      a["law"] = "constant";
      a["value"] = c->value;
    } else {
      const auto& s = std::get<SingularBoundaryLaw>(arc.law);
      a["law"] = "singular";
      a["s_at_tau2"] = s.s_at_tau2;
      a["tau2"] = s.tau2;
    }
    arcs.push_back(std::move(a));
  }
  return Json{{"arcs", std::move(arcs)}, {"terminal_zero", control.terminal_zero}};
}

Json to_json(const FamilyOutcome& f) {
  if (!f.evaluated) return Json{{"evaluated", false}};
  return Json{{"evaluated", true},
              {"knobs", to_json(f.knobs)},
              {"objective", f.objective},
              {"cost", to_json(f.cost)},
              {"feasible", f.feasible}};
}

Json to_json(const OptimizationReport& r) {
  return Json{{"best_knobs", to_json(r.best_knobs)},
              {"best_cost", to_json(r.best_cost)},
              {"objective", r.objective},
              {"switch_times", r.switch_times},
              {"feasible", r.feasible},
              {"max_i", r.max_i},
              {"evaluations", r.evaluations},
              {"family_compared", Json{{"bangbang", to_json(r.bangbang)},
                                       {"boundary_arc", to_json(r.boundary)},
                                       {"tie", r.tie}}},
              {"control", to_json(r.control)}};
}

Json to_json(const PmpReport& r) {
  Json junctions = Json::array();
  for (const auto& j : r.junctions)
    junctions.push_back(Json{{"kind", j.kind == JunctionKind::Entry ? "entry" : "exit"},
                             {"t", j.t},
                             {"atom", j.atom},
                             {"psi_left", j.psi_left},
                             {"psi_right", j.psi_right}});
  return Json{{"stationarity_fraction", r.stationarity_fraction},
              {"singular_residual", r.singular_residual},
              {"hamiltonian_residual", number(r.hamiltonian_residual)},
              {"hamiltonian_scale", r.hamiltonian_scale},
              {"hamiltonian_absolute", r.hamiltonian_absolute},
              {"eta_min", r.eta_min},
              {"psi_min", r.psi_min},
              {"p_s_monotone", r.p_s_monotone},
              {"p_s_min", r.p_s_min},
              {"boundary_margin", number(r.boundary_margin)},
              {"mu_nondecreasing", r.mu_nondecreasing},
              {"switch_times", r.switch_times},
              {"junction_residuals", r.junction_residuals},
              {"junctions", std::move(junctions)}};
}

Json to_json(const GammaDiagnostic& g) {
  Json gaps = Json::array();
  Json rel = Json::array();
  for (std::size_t k = 0; k < g.horizons.size(); ++k) {
    gaps.push_back(g.gap(k));
    rel.push_back(g.relative_gap(k));
  }
  return Json{{"horizons", g.horizons},
              {"truncated_costs", g.truncated_costs},
              {"finite_costs", g.finite_costs},
              {"terminal_s", g.terminal_s},
              {"settled", g.settled},
              {"limit_cost", g.limit_cost},
              {"limit_horizon", g.limit_horizon},
              {"gaps", std::move(gaps)},
              {"relative_gaps", std::move(rel)}};
}

Json events_json(const Trajectory& traj) {
  Json events = Json::array();
  for (const auto& e : traj.events) {
    const char* kind = e.kind == EventKind::IcuHit      ? "icu_hit"
                       : e.kind == EventKind::HerdCross ? "herd_cross"
                                                        : "switch";
    events.push_back(Json{{"kind", kind}, {"t", e.t}});
  }
  return events;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) {
  auto os = open_output(path);
  os << j.dump(2) << "\n";
  finish(os, path);
}

void write_trajectory(const std::filesystem::path& dir, const CostWeights& w, const Trajectory& traj) {
  const auto path = dir / "trajectory.csv";
  auto os = open_output(path);
  write_trajectory_csv(os, w, traj);
  finish(os, path);
}

Json header(Command command, const Scenario& s) {
  return Json{{"command", to_string(command)}, {"scenario", to_json(s)}};
}

void run_simulate(const Scenario& s, const std::filesystem::path& dir) {
  PiecewiseControl none;
  none.terminal_zero = true;
  const auto traj = simulate(s.params, s.state0, none, s.horizon, s.step);
  const auto cost = cost_finite(s.params, s.weights, traj);
  Json report = header(Command::Simulate, s);
  report["zone"] = to_string(classify(s.params, s.state0));
  report["max_i"] = traj.max_i();
  report["icu_respected"] = traj.max_i() <= s.params.i_M + kFeasibilityTolerance;
  report["final_state"] = Json{{"s", traj.back().s}, {"i", traj.back().i}};
  report["finite_cost"] = to_json(cost);
  report["mass_balance_residual"] = mass_balance_residual(s.params, traj);
  report["events"] = events_json(traj);
  write_trajectory(dir, s.weights, traj);
  write_json(dir / "report.json", report);
}

void run_viability(const Scenario& s, const std::filesystem::path& dir) {
  const auto crit = critical_susceptibles(s.params);
  Json report = header(Command::Viability, s);
  report["zone"] = to_string(classify(s.params, s.state0));
  report["herd_threshold"] = crit.herd;
  report["controlled_threshold"] = crit.max_controlled;
  report["at_s0"] = Json{{"phi0", curve_value(s.params, Curve::Phi0, s.state0.s)},
                         {"psi0", curve_value(s.params, Curve::Psi0, s.state0.s)},
                         {"phimax", curve_value(s.params, Curve::PhiMax, s.state0.s)}};
  report["free_peak"] = free_peak(s.params, s.state0);
  const auto path = dir / "zones.csv";
  auto os = open_output(path);
  write_zones_csv(os, s.params);
  finish(os, path);
  write_json(dir / "report.json", report);
}

double singular_duration(const PiecewiseControl& control) {
  double total = 0.0;
  for (const auto& arc : control.arcs)
    if (is_singular(arc.law)) total += arc.t_end - arc.t_start;
  return total;
}

void run_greedy(const Scenario& s, const std::filesystem::path& dir) {
  const auto control = synthesize_greedy(s.params, s.state0, s.step);
  const auto eval = evaluate_infinite(s.params, s.weights, control, s.state0, s.step);
  const auto traj = simulate(s.params, s.state0, control, s.horizon, s.step);
  Json report = header(Command::Greedy, s);
  report["control"] = to_json(control);
  report["cost"] = to_json(eval.cost);
  report["max_i"] = eval.max_i;
  report["feasible"] = eval.max_i <= s.params.i_M + kFeasibilityTolerance;
  report["t_stab"] = t_stab(s.params);
  report["singular_duration"] = singular_duration(control);
  report["herd_crossing"] = number(traj.first_event(EventKind::HerdCross));
  report["events"] = events_json(traj);
  write_trajectory(dir, s.weights, traj);
  write_json(dir / "report.json", report);
}

void run_optimize(const Scenario& s, const std::filesystem::path& dir, std::ostream& out) {
  SearchOptions opts;
  opts.step = s.step;
  const auto r = optimize_structured(s.params, s.weights, s.state0, s.horizon, opts);
  const auto traj = simulate(s.params, s.state0, r.control, s.horizon, s.step);
  Json report = header(Command::Optimize, s);
  report["optimization"] = to_json(r);
  write_trajectory(dir, s.weights, traj);
  write_json(dir / "report.json", report);
  out << "best cost " << g12(r.best_cost.total) << " ("
      << (family_of(r.best_knobs) == Family::BangBang ? "BangBang" : "BoundaryArc") << ")\n";
}

void run_verify(const Scenario& s, const std::filesystem::path& dir, std::ostream& out) {
  SearchOptions opts;
  opts.step = s.step;
  const auto r = optimize_structured(s.params, s.weights, s.state0, s.horizon, opts);
  const double T = verification_horizon(s.params, s.state0, r.control, 1e-5, s.step);
  const auto traj = simulate(s.params, s.state0, r.control, T, s.step);
  const auto adjoint = integrate_adjoint(s.params, s.weights, traj, r.control);
  const auto pmp = verify_pmp(s.params, s.weights, adjoint, traj, r.control);

  Json report = header(Command::Verify, s);
  report["optimization"] = to_json(r);
  report["verification_horizon"] = T;
  report["pmp"] = to_json(pmp);
  write_trajectory(dir, s.weights, traj);

  const auto path = dir / "adjoint.csv";
  auto os = open_output(path);
  os << "t,p_s,p_i,eta,psi,mu_cum\n";
  const auto stride = static_cast<std::size_t>(std::max(1.0, std::round(kCsvSpacing / s.step)));
  for (std::size_t k = 0; k < adjoint.samples.size(); ++k) {
    if (k % stride != 0 && k + 1 != adjoint.samples.size()) continue;
    const auto& a = adjoint.samples[k];
    os << g12(a.t) << ',' << g12(a.p_s) << ',' << g12(a.p_i) << ',' << g12(a.eta) << ','
       << g12(a.psi) << ',' << g12(a.mu_cum) << '\n';
  }
  finish(os, path);
  write_json(dir / "report.json", report);
  out << "stationarity " << g12(pmp.stationarity_fraction) << ", hamiltonian residual "
      << g12(pmp.hamiltonian_residual) << "\n";
}

void run_gamma(const Scenario& s, const std::filesystem::path& dir, std::ostream& out) {
  SearchOptions opts;
  opts.step = s.step;
  const auto g = gamma_diagnostic(s.params, s.weights, s.state0, gamma_horizons(s.horizon), opts);
  Json report = header(Command::Gamma, s);
  report["gamma"] = to_json(g);
  write_json(dir / "report.json", report);
  out << "final relative gap " << g12(g.relative_gap(g.horizons.size() - 1)) << "\n";
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Simulate: return "simulate";
    case Command::Viability: return "viability";
    case Command::Greedy: return "greedy";
    case Command::Optimize: return "optimize";
    case Command::Verify: return "verify";
    case Command::Gamma: return "gamma";
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view name) {
  for (auto c : {Command::Simulate, Command::Viability, Command::Greedy, Command::Optimize,
                 Command::Verify, Command::Gamma})
    if (to_string(c) == name) return c;
  return std::nullopt;
}

Scenario apply_overrides(Scenario scenario, const ScenarioOverrides& overrides) {
  if (overrides.lambda2) scenario.weights.lambda2 = *overrides.lambda2;
  if (overrides.horizon) scenario.horizon = *overrides.horizon;
  if (overrides.step) scenario.step = *overrides.step;
  scenario.validate();
  return scenario;
}

void write_trajectory_csv(std::ostream& os, const CostWeights& w, const Trajectory& traj) {
  os << "t,s,i,u,cumulative_cost\n";
  const auto& x = traj.samples;
  if (x.empty()) return;
  const double h = x.size() > 1 ? x[1].t - x[0].t : kCsvSpacing;
  const auto stride = static_cast<std::size_t>(std::max(1.0, std::round(kCsvSpacing / h)));

  double cumulative = 0.0;
  auto row = [&](std::size_t k) {
    os << g12(x[k].t) << ',' << g12(x[k].s) << ',' << g12(x[k].i) << ',' << g12(x[k].u) << ','
       << g12(cumulative) << '\n';
  };
  row(0);
  for (std::size_t k = 1; k < x.size(); ++k) {
    const double dt = x[k].t - x[k - 1].t;
    cumulative += 0.5 * dt *
                  (w.lambda1 * (x[k - 1].u + x[k].u_left) + w.lambda2 * (x[k - 1].i + x[k].i));
    const bool jump = x[k].u != x[k].u_left || (k + 1 < x.size() && x[k + 1].u_left != x[k + 1].u);
    if (k % stride == 0 || jump || k + 1 == x.size()) row(k);
  }
}

void write_zones_csv(std::ostream& os, const EpidemicParams& p) {
  os << "s,phi0,psi0,phimax\n";
  for (int k = 1; k <= 1000; ++k) {
    const double s = k * 1e-3;
    os << g12(s) << ',' << g12(curve_value(p, Curve::Phi0, s)) << ','
       << g12(curve_value(p, Curve::Psi0, s)) << ',' << g12(curve_value(p, Curve::PhiMax, s))
       << '\n';
  }
}

std::vector<double> gamma_horizons(double horizon) {
  std::vector<double> out;
  for (double f : {1.0 / 2.0, 2.0 / 3.0, 5.0 / 6.0, 1.0}) {
    const double T = std::round(horizon * f / 10.0) * 10.0;
    if (T > 0.0 && (out.empty() || T > out.back())) out.push_back(T);
  }
  return out;
}

int run_scenario(const RunRequest& request, std::ostream& out, std::ostream& err) {
  try {
    const Scenario s = apply_overrides(resolve_scenario(request.scenario_source), request.overrides);
    std::error_code ec;
    std::filesystem::create_directories(request.output_dir, ec);
    if (ec)
      throw Error(ErrorCode::Io, "cannot create " + request.output_dir.string() + ": " + ec.message());

    switch (request.command) {
      case Command::Simulate: run_simulate(s, request.output_dir); break;
      case Command::Viability: run_viability(s, request.output_dir); break;
      case Command::Greedy: run_greedy(s, request.output_dir); break;
      case Command::Optimize: run_optimize(s, request.output_dir, out); break;
      case Command::Verify: run_verify(s, request.output_dir, out); break;
      case Command::Gamma: run_gamma(s, request.output_dir, out); break;
    }
    out << to_string(request.command) << " " << s.name << ": wrote " << request.output_dir.string()
        << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << "epictrl: " << e.what() << "\n";
    return e.code() == ErrorCode::InfeasibleStart ? kExitInfeasible : kExitFailure;
  } catch (const std::exception& e) {
    err << "epictrl: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace epictrl

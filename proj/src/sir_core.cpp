#include "epictrl/sir_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace epictrl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidInitialState: return "InvalidInitialState";
    case ErrorCode::InvalidControl: return "InvalidControl";
    case ErrorCode::Undefined: return "Undefined";
    case ErrorCode::NonPositiveS: return "NonPositiveS";
    case ErrorCode::OutsideTriangle: return "OutsideTriangle";
    case ErrorCode::InfeasibleStart: return "InfeasibleStart";
    case ErrorCode::NoSaturation: return "NoSaturation";
    case ErrorCode::ConstraintViolated: return "ConstraintViolated";
    case ErrorCode::OutOfSingularRange: return "OutOfSingularRange";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::NonTerminatingControl: return "NonTerminatingControl";
    case ErrorCode::HorizonNotFound: return "HorizonNotFound";
    case ErrorCode::InconsistentInputs: return "InconsistentInputs";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

void EpidemicParams::validate() const {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidParams, "beta must be positive");
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidParams, "gamma must be positive");
  if (!(u_max > 0.0 && u_max < beta))
    throw Error(ErrorCode::InvalidParams, "u_max must lie in (0, beta)");
  if (!(i_M > 0.0 && i_M <= 1.0)) throw Error(ErrorCode::InvalidParams, "i_M must lie in (0, 1]");
}

bool in_triangle(const EpidemicState& x) {
  return x.s > 0.0 && x.i > 0.0 && x.s + x.i <= 1.0 + 1e-15;
}

void validate_state(const EpidemicState& x) {
  if (!in_triangle(x))
    throw Error(ErrorCode::InvalidInitialState,
                "state (" + std::to_string(x.s) + ", " + std::to_string(x.i) +
                    ") is outside the triangle s>0, i>0, s+i<=1");
}

double law_value(const EpidemicParams& p, const ControlLaw& law, double t) {
  if (const auto* c = std::get_if<ConstantLaw>(&law)) return c->value;
  const auto& b = std::get<SingularBoundaryLaw>(law);
  return p.beta - p.gamma / (b.s_at_tau2 + p.gamma * p.i_M * (b.tau2 - t));
}

bool is_singular(const ControlLaw& law) { return std::holds_alternative<SingularBoundaryLaw>(law); }

double PiecewiseControl::end_time() const { return arcs.empty() ? 0.0 : arcs.back().t_end; }

void PiecewiseControl::validate(const EpidemicParams& p) const {
  constexpr double kValueTol = 1e-9;
  double expected_start = 0.0;
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    const auto& arc = arcs[k];
    if (arc.t_start != expected_start)
      throw Error(ErrorCode::InvalidControl, "arc " + std::to_string(k) + " is not contiguous");
    if (!(arc.t_end >= arc.t_start))
      throw Error(ErrorCode::InvalidControl, "arc " + std::to_string(k) + " ends before it starts");
    if (std::isinf(arc.t_end) && k + 1 != arcs.size())
      throw Error(ErrorCode::InvalidControl, "only the final arc may be unbounded");
    if (const auto* c = std::get_if<ConstantLaw>(&arc.law)) {
      if (c->value < -kValueTol || c->value > p.u_max + kValueTol)
        throw Error(ErrorCode::InvalidControl,
                    "arc " + std::to_string(k) + " value outside [0, u_max]");
    } else {
      if (std::isinf(arc.t_end))
        throw Error(ErrorCode::InvalidControl, "boundary-law arc must be bounded");
      const auto& b = std::get<SingularBoundaryLaw>(arc.law);
      // The law is monotone in t, so the endpoints bound it.
      for (double t : {arc.t_start, arc.t_end}) {
        const double denom = b.s_at_tau2 + p.gamma * p.i_M * (b.tau2 - t);
        const double v = law_value(p, arc.law, t);
        if (!(denom > 0.0) || v < -kValueTol || v > p.u_max + kValueTol)
          throw Error(ErrorCode::InvalidControl,
                      "arc " + std::to_string(k) + " boundary law leaves [0, u_max]");
      }
    }
    expected_start = arc.t_end;
  }
}

double control_value_at(const EpidemicParams& p, const PiecewiseControl& control, double t) {
  if (t < 0.0) throw Error(ErrorCode::Undefined, "negative time");
  for (const auto& arc : control.arcs) {
    if (t >= arc.t_start && t < arc.t_end) return law_value(p, arc.law, t);
  }
  if (control.terminal_zero && t >= control.end_time()) return 0.0;
  throw Error(ErrorCode::Undefined, "time " + std::to_string(t) + " is beyond the last arc");
}

double Trajectory::max_i() const {
  double m = 0.0;
  for (const auto& x : samples) m = std::max(m, x.i);
  return m;
}

double Trajectory::first_event(EventKind kind) const {
  for (const auto& e : events)
    if (e.kind == kind) return e.t;
  return std::numeric_limits<double>::quiet_NaN();
}

EpidemicState sir_rhs(const EpidemicParams& p, double u, const EpidemicState& x) {
  const double infection = (p.beta - u) * x.s * x.i;
  return {-infection, infection - p.gamma * x.i};
}

EpidemicState rk4_step(const EpidemicParams& p, const ControlLaw& law, double t,
                       const EpidemicState& x, double h) {
  const double half = 0.5 * h;
  const double u0 = law_value(p, law, t);
  const double u1 = law_value(p, law, t + half);
  const double u2 = law_value(p, law, t + h);
  const EpidemicState k1 = sir_rhs(p, u0, x);
  const EpidemicState k2 = sir_rhs(p, u1, {x.s + half * k1.s, x.i + half * k1.i});
  const EpidemicState k3 = sir_rhs(p, u1, {x.s + half * k2.s, x.i + half * k2.i});
  const EpidemicState k4 = sir_rhs(p, u2, {x.s + h * k3.s, x.i + h * k3.i});
  return {x.s + h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s),
          x.i + h / 6.0 * (k1.i + 2.0 * k2.i + 2.0 * k3.i + k4.i)};
}

namespace {

// Bisection on the sub-step length inside one step, using the RK4 step from
// the step start as the dense representation.
template <typename G>
double localize_crossing(const EpidemicParams& p, const ControlLaw& law, double t,
                         const EpidemicState& x, double h, G&& g) {
  double lo = 0.0;
  double hi = h;
  while (hi - lo > kEventTimeTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (g(rk4_step(p, law, t, x, mid)) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

std::size_t step_count(double length, double step) {
  if (length <= 0.0) return 0;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(length / step - 1e-9)));
}

}  // namespace

AdvanceResult advance_arc(const EpidemicParams& p, const ControlLaw& law, double t0,
                          const EpidemicState& x0, double t1, double step,
                          const StopFunction& stop,
                          const std::function<void(double, const EpidemicState&)>& on_step,
                          double max_time) {
  if (!(step > 0.0)) throw Error(ErrorCode::PreconditionViolated, "step must be positive");
  AdvanceResult out{t0, x0, false};
  if (!(t1 > t0)) return out;

  const bool bounded = std::isfinite(t1);
  const double limit = bounded ? t1 : max_time;
  if (!(limit > t0)) return out;
  const std::size_t n = step_count(limit - t0, step);
  const double h = (limit - t0) / static_cast<double>(n);

  double g_prev = stop ? stop(x0) : 0.0;
  EpidemicState x = x0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    const double t_next = (k + 1 == n) ? limit : t0 + static_cast<double>(k + 1) * h;
    const double hk = t_next - t;
    EpidemicState next = rk4_step(p, law, t, x, hk);
    if (stop) {
      const double g_next = stop(next);
      if (g_prev < 0.0 && g_next >= 0.0) {
        const double theta = localize_crossing(p, law, t, x, hk, stop);
        out.t = t + theta;
        out.state = rk4_step(p, law, t, x, theta);
        out.stopped = true;
        if (on_step) on_step(out.t, out.state);
        return out;
      }
      g_prev = g_next;
    }
    x = next;
    if (on_step) on_step(t_next, x);
  }
  out.t = limit;
  out.state = x;
  if (!bounded && stop)
    throw Error(ErrorCode::HorizonNotFound, "stop condition not reached before max_time");
  return out;
}

Trajectory simulate(const EpidemicParams& p, const EpidemicState& x0,
                    const PiecewiseControl& control, double t_end, double step) {
  p.validate();
  validate_state(x0);
  control.validate(p);
  if (!(step > 0.0)) throw Error(ErrorCode::PreconditionViolated, "step must be positive");
  if (!(t_end >= 0.0)) throw Error(ErrorCode::PreconditionViolated, "t_end must be >= 0");

  // Arc list clipped to [0, t_end], with the terminal zero arc appended.
  std::vector<ControlArc> arcs;
  for (const auto& arc : control.arcs) {
    if (arc.t_start >= t_end) break;
    ControlArc clipped = arc;
    clipped.t_end = std::min(arc.t_end, t_end);
    if (clipped.t_end > clipped.t_start) arcs.push_back(clipped);
  }
  const double covered = std::min(control.end_time(), t_end);
  if (covered < t_end) {
    if (!control.terminal_zero)
      throw Error(ErrorCode::InvalidControl, "control does not cover [0, t_end]");
    arcs.push_back({std::max(covered, 0.0), t_end, ConstantLaw{0.0}});
  }

  Trajectory traj;
  const double u_initial = arcs.empty() ? 0.0 : law_value(p, arcs.front().law, 0.0);
  traj.samples.push_back({0.0, x0.s, x0.i, u_initial, u_initial});
  if (arcs.empty()) return traj;
  traj.samples.reserve(static_cast<std::size_t>(t_end / step) + arcs.size() + 2);

  const double herd = p.herd_threshold();
  EpidemicState x = x0;
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    const auto& arc = arcs[a];
    if (a > 0) {
      const double u_new = law_value(p, arc.law, arc.t_start);
      traj.samples.back().u = u_new;
      traj.events.push_back({EventKind::Switch, arc.t_start});
    }
    const bool singular = is_singular(arc.law);
    const std::size_t n = step_count(arc.t_end - arc.t_start, step);
    const double h = (arc.t_end - arc.t_start) / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = arc.t_start + static_cast<double>(k) * h;
      const double t_next = (k + 1 == n) ? arc.t_end : arc.t_start + static_cast<double>(k + 1) * h;
      const double hk = t_next - t;
      const EpidemicState next = rk4_step(p, arc.law, t, x, hk);

      if (!singular && x.i < p.i_M && next.i >= p.i_M) {
        const double theta = localize_crossing(
            p, arc.law, t, x, hk, [&](const EpidemicState& y) { return y.i - p.i_M; });
        traj.events.push_back({EventKind::IcuHit, t + theta});
      }
      if (x.s > herd && next.s <= herd) {
        const double theta = localize_crossing(
            p, arc.law, t, x, hk, [&](const EpidemicState& y) { return herd - y.s; });
        traj.events.push_back({EventKind::HerdCross, t + theta});
      }

      x = next;
      const double u_here = law_value(p, arc.law, t_next);
      traj.samples.push_back({t_next, x.s, x.i, u_here, u_here});
    }
  }
  return traj;
}

double mass_balance_residual(const EpidemicParams& p, const Trajectory& traj) {
  if (traj.samples.empty()) return 0.0;
  const auto& first = traj.samples.front();
  const double m0 = first.s + first.i;
  double integral = 0.0;
  double worst = 0.0;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const auto& a = traj.samples[k - 1];
    const auto& b = traj.samples[k];
    integral += 0.5 * (b.t - a.t) * (a.i + b.i);
    worst = std::max(worst, std::abs(b.s + b.i - m0 + p.gamma * integral));
  }
  return worst;
}

}  // namespace epictrl

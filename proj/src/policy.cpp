#include "epictrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epictrl/viability.hpp"

namespace epictrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void push_arc(std::vector<ControlArc>& arcs, double t0, double t1, ControlLaw law) {
  if (t1 > t0) arcs.push_back({t0, t1, law});
}

double phimax_gap(const EpidemicParams& p, const EpidemicState& x) {
  return x.i - curve_value(p, Curve::PhiMax, x.s);
}

// Boundary law starting at (t, s) and lasting delta.
SingularBoundaryLaw boundary_law(const EpidemicParams& p, double t, double s, double delta) {
  return {s - p.gamma * p.i_M * delta, t + delta};
}

}  // namespace

double t_stab(const EpidemicParams& p) {
  return p.u_max / (p.beta * (p.beta - p.u_max) * p.i_M);
}

double singular_value(const EpidemicParams& p, double s) {
  const double lo = p.herd_threshold();
  const double hi = p.controlled_threshold();
  const double slack = 1e-12 * hi;
  if (!(s >= lo - slack && s <= hi + slack))
    throw Error(ErrorCode::OutOfSingularRange, "s outside [gamma/beta, gamma/(beta-u_max)]");
  return std::clamp(p.beta - p.gamma / s, 0.0, p.u_max);
}

PiecewiseControl synthesize_greedy(const EpidemicParams& p, const EpidemicState& x0,
                                   double step) {
  p.validate();
  const Zone zone = classify(p, x0);
  if (zone == Zone::Infeasible)
    throw Error(ErrorCode::InfeasibleStart, "initial state lies above PhiMax");

  const double herd = p.herd_threshold();
  const double ctrl = p.controlled_threshold();
  const ControlLaw zero = ConstantLaw{0.0};
  const ControlLaw full = ConstantLaw{p.u_max};

  PiecewiseControl out;
  out.terminal_zero = true;

  if (zone == Zone::Safe) {
    double t_herd = 0.0;
    if (x0.s > herd) {
      t_herd = advance_arc(p, zero, 0.0, x0, kInf, step,
                           [&](const EpidemicState& y) { return herd - y.s; })
                   .t;
    }
    out.arcs.push_back({0.0, t_herd, zero});
    return out;
  }

  // (a) free arc until the trajectory meets PhiMax.
  double t = 0.0;
  EpidemicState x = x0;
  if (phimax_gap(p, x) < -1e-14) {
    const auto r = advance_arc(p, zero, 0.0, x0, kInf, step,
                               [&](const EpidemicState& y) { return phimax_gap(p, y); });
    t = r.t;
    x = r.state;
  }
  push_arc(out.arcs, 0.0, t, zero);

  // (b) full effort down to the peak abscissa of u_max trajectories.
  if (x.s > ctrl) {
    const double t0 = t;
    const auto r = advance_arc(p, full, t0, x, kInf, step,
                               [&](const EpidemicState& y) { return ctrl - y.s; });
    t = r.t;
    x = r.state;
    push_arc(out.arcs, t0, t, full);
  }

  // (c) ride i = i_M until herd immunity.
  if (x.s > herd) {
    const double delta = (x.s - herd) / (p.gamma * p.i_M);
    push_arc(out.arcs, t, t + delta, boundary_law(p, t, x.s, delta));
  }
  return out;
}

std::optional<double> saturation_onset(const EpidemicParams& p, const EpidemicState& x0,
                                       double step) {
  if (phimax_gap(p, x0) >= -1e-14) return 0.0;
  const double herd = p.herd_threshold();
  if (x0.s <= herd) return std::nullopt;
  const auto r = advance_arc(p, ConstantLaw{0.0}, 0.0, x0, kInf, step, [&](const EpidemicState& y) {
    return std::max(phimax_gap(p, y), herd - y.s);
  });
  if (phimax_gap(p, r.state) >= 0.0) return r.t;
  return std::nullopt;
}

PiecewiseControl build_bangbang(const EpidemicParams& p, const BangBangKnobs& knobs) {
  if (!(knobs.sigma0 >= 0.0 && knobs.sigma1 >= knobs.sigma0))
    throw Error(ErrorCode::PreconditionViolated, "bang-bang knobs need 0 <= sigma0 <= sigma1");
  PiecewiseControl out;
  out.terminal_zero = true;
  push_arc(out.arcs, 0.0, knobs.sigma0, ConstantLaw{0.0});
  push_arc(out.arcs, knobs.sigma0, knobs.sigma1, ConstantLaw{p.u_max});
  return out;
}

SaturationProbe probe_saturation(const EpidemicParams& p, const EpidemicState& x0, double tau0,
                                 double step) {
  if (!(tau0 >= 0.0)) throw Error(ErrorCode::PreconditionViolated, "tau0 must be >= 0");
  SaturationProbe out;
  out.tau0 = tau0;

  double peak = x0.i;
  const auto free = advance_arc(p, ConstantLaw{0.0}, 0.0, x0, tau0, step, {},
                                [&](double, const EpidemicState& y) { peak = std::max(peak, y.i); });
  out.at_tau0 = free.state;
  out.free_excess = std::max(0.0, peak - p.i_M);
  out.offset = phimax_gap(p, out.at_tau0);

  const double ctrl = p.controlled_threshold();
  out.tau1 = tau0;
  out.at_tau1 = out.at_tau0;
  if (out.at_tau0.s > ctrl) {
    const auto r = advance_arc(p, ConstantLaw{p.u_max}, tau0, out.at_tau0, kInf, step,
                               [&](const EpidemicState& y) { return ctrl - y.s; });
    out.tau1 = r.t;
    out.at_tau1 = r.state;
  }
  return out;
}

PiecewiseControl assemble_boundary(const EpidemicParams& p, const SaturationProbe& probe,
                                   const BoundaryArcKnobs& knobs) {
  if (!(knobs.delta_sing >= 0.0 && knobs.delta_post >= 0.0))
    throw Error(ErrorCode::PreconditionViolated, "boundary knobs need non-negative durations");
  const double herd = p.herd_threshold();
  const double budget = std::max(0.0, (probe.at_tau1.s - herd) / (p.gamma * p.i_M));
  const double delta = std::min(knobs.delta_sing, budget);
  const double tau2 = probe.tau1 + delta;

  PiecewiseControl out;
  out.terminal_zero = true;
  push_arc(out.arcs, 0.0, probe.tau0, ConstantLaw{0.0});
  push_arc(out.arcs, probe.tau0, probe.tau1, ConstantLaw{p.u_max});
  push_arc(out.arcs, probe.tau1, tau2, boundary_law(p, probe.tau1, probe.at_tau1.s, delta));
  push_arc(out.arcs, tau2, tau2 + knobs.delta_post, ConstantLaw{p.u_max});
  return out;
}

PiecewiseControl build_boundary(const EpidemicParams& p, const EpidemicState& x0,
                                const BoundaryArcKnobs& knobs, double step) {
  p.validate();
  if (classify(p, x0) == Zone::Infeasible)
    throw Error(ErrorCode::InfeasibleStart, "initial state lies above PhiMax");
  const SaturationProbe probe = probe_saturation(p, x0, knobs.tau0, step);
  if (probe.free_excess > kSaturationTolerance)
    throw Error(ErrorCode::ConstraintViolated, "free arc exceeds i_M before tau0");
  if (probe.offset > kSaturationTolerance)
    throw Error(ErrorCode::ConstraintViolated, "u_max arc from tau0 overshoots i_M");
  if (probe.offset < -kSaturationTolerance)
    throw Error(ErrorCode::NoSaturation, "u_max arc from tau0 peaks below i_M");
  return assemble_boundary(p, probe, knobs);
}

PiecewiseControl build_control(const EpidemicParams& p, const EpidemicState& x0,
                               const StructureKnobs& knobs, double step) {
  if (const auto* bb = std::get_if<BangBangKnobs>(&knobs)) return build_bangbang(p, *bb);
  return build_boundary(p, x0, std::get<BoundaryArcKnobs>(knobs), step);
}

}  // namespace epictrl

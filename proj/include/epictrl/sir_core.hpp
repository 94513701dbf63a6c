#pragma once

// Controlled SIR system with an ICU ceiling on the infectious fraction.
//
//   s' = -(beta - u) s i
//   i' =  (beta - u) s i - gamma i
//
// Controls are piecewise: each arc is either a constant effort or the
// boundary law that holds i at i_M while s decreases linearly in time.

#include <cstddef>
#include <functional>
#include <limits>
#include <variant>
#include <vector>

#include "epictrl/error.hpp"

namespace epictrl {

struct EpidemicParams {
  double beta = 0.0;   // transmission rate, 1/day
  double gamma = 0.0;  // recovery rate, 1/day
  double u_max = 0.0;  // maximal control effort, 1/day
  double i_M = 0.0;    // ICU capacity as a fraction of the population

  /// Throws Error(InvalidParams) unless beta > 0, gamma > 0, 0 < u_max < beta, 0 < i_M <= 1.
  void validate() const;

  /// gamma / beta: below this level i decreases under zero control.
  double herd_threshold() const { return gamma / beta; }
  /// gamma / (beta - u_max): peak abscissa of every u_max trajectory.
  double controlled_threshold() const { return gamma / (beta - u_max); }
};

struct EpidemicState {
  double s = 0.0;
  double i = 0.0;
};

/// s > 0, i > 0, s + i <= 1.
bool in_triangle(const EpidemicState& x);
/// Throws Error(InvalidInitialState) when the state is outside the triangle.
void validate_state(const EpidemicState& x);

struct ConstantLaw {
  double value = 0.0;
};

/// u(t) = beta - gamma / (s_at_tau2 + gamma * i_M * (tau2 - t)).
struct SingularBoundaryLaw {
  double s_at_tau2 = 0.0;
  double tau2 = 0.0;
};

using ControlLaw = std::variant<ConstantLaw, SingularBoundaryLaw>;

double law_value(const EpidemicParams& p, const ControlLaw& law, double t);
bool is_singular(const ControlLaw& law);

struct ControlArc {
  double t_start = 0.0;
  double t_end = 0.0;  // +inf allowed on the final arc only
  ControlLaw law = ConstantLaw{};
};

/// Ordered, contiguous arcs starting at t = 0. With terminal_zero set the
/// control is zero after the last arc.
struct PiecewiseControl {
  std::vector<ControlArc> arcs;
  bool terminal_zero = false;

  /// End of the last arc (0 when there are no arcs).
  double end_time() const;
  /// Throws Error(InvalidControl) on broken contiguity or values outside [0, u_max].
  void validate(const EpidemicParams& p) const;
};

/// Value of the arc containing t (arcs are right-open); zero past the last
/// arc if terminal_zero, otherwise Error(Undefined).
double control_value_at(const EpidemicParams& p, const PiecewiseControl& control, double t);

enum class EventKind { IcuHit, HerdCross, Switch };

struct TrajectoryEvent {
  EventKind kind = EventKind::Switch;
  double t = 0.0;
};

struct TrajectorySample {
  double t = 0.0;
  double s = 0.0;
  double i = 0.0;
  double u = 0.0;       // right limit: value on the panel starting here
  double u_left = 0.0;  // left limit: value on the panel ending here
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<TrajectoryEvent> events;

  const TrajectorySample& front() const { return samples.front(); }
  const TrajectorySample& back() const { return samples.back(); }
  EpidemicState final_state() const { return {samples.back().s, samples.back().i}; }
  double max_i() const;
  /// Time of the first event of the given kind, or NaN.
  double first_event(EventKind kind) const;
};

inline constexpr double kEventTimeTolerance = 1e-10;
inline constexpr double kDefaultStep = 0.01;

/// Right-hand side of the state equations for a given effort.
EpidemicState sir_rhs(const EpidemicParams& p, double u, const EpidemicState& x);

/// One classical 4th-order step of length h from (t, x).
EpidemicState rk4_step(const EpidemicParams& p, const ControlLaw& law, double t,
                       const EpidemicState& x, double h);

/// Scalar function of the state whose upward zero crossing stops an arc.
using StopFunction = std::function<double(const EpidemicState&)>;

struct AdvanceResult {
  double t = 0.0;
  EpidemicState state;
  bool stopped = false;  // true if the stop function crossed zero
};

/// Integrates one law from (t0, x0) to t1 (t1 may be +inf, bounded by
/// max_time) with steps aligned so that t1 is hit exactly. When a stop
/// function is given, integration halts at its first upward zero crossing,
/// localized by bisection to kEventTimeTolerance. on_step receives every
/// accepted grid point after the initial one.
AdvanceResult advance_arc(const EpidemicParams& p, const ControlLaw& law, double t0,
                          const EpidemicState& x0, double t1, double step,
                          const StopFunction& stop = {},
                          const std::function<void(double, const EpidemicState&)>& on_step = {},
                          double max_time = 1e5);

/// Integrates the controlled system on [0, t_end] with steps aligned to arc
/// boundaries, tagging ICU hits, herd-immunity crossings and switches.
Trajectory simulate(const EpidemicParams& p, const EpidemicState& x0,
                    const PiecewiseControl& control, double t_end, double step = kDefaultStep);

/// max_k |s_k + i_k - s_0 - i_0 + gamma * int_0^{t_k} i| with trapezoid quadrature.
double mass_balance_residual(const EpidemicParams& p, const Trajectory& traj);

}  // namespace epictrl

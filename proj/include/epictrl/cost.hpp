#pragma once

// Linear running cost lambda1 * u + lambda2 * i, on finite horizons by
// trapezoid quadrature and on the half-line via the closed-form tail
//   int_T^inf i dt = (s(T) + i(T) - s_inf) / gamma   (u = 0 after T).

#include "epictrl/sir_core.hpp"

namespace epictrl {

struct CostWeights {
  double lambda1 = 1.0;  // control effort weight
  double lambda2 = 0.0;  // infection weight

  /// Throws Error(PreconditionViolated) unless lambda1 > 0 and lambda2 >= 0.
  void validate() const;
};

struct CostBreakdown {
  double control_part = 0.0;
  double infection_part = 0.0;
  double tail_part = 0.0;
  double total = 0.0;
};

/// Limit of s under zero control from x: the root in (0, gamma/beta) of
///   z - (gamma/beta) ln z = s + i - (gamma/beta) ln s,
/// by bisection to 1e-12.
double s_infinity(const EpidemicParams& p, const EpidemicState& x);

/// int_0^inf i dt under zero control from x.
double tail_infected_integral(const EpidemicParams& p, const EpidemicState& x);

/// Trapezoid quadrature on the sample grid; u uses its one-sided limits so
/// that no panel straddles a control discontinuity. tail_part is zero.
CostBreakdown cost_finite(const EpidemicParams& p, const CostWeights& w, const Trajectory& traj);

struct CostEvaluation {
  CostBreakdown cost;
  Trajectory trajectory;  // on [0, T_f], T_f = end of the last finite arc
  double max_i = 0.0;     // over [0, inf), including the zero-control tail peak
};

/// Infinite-horizon cost with the trajectory it came from.
/// Throws Error(NonTerminatingControl) unless control.terminal_zero is set.
CostEvaluation evaluate_infinite(const EpidemicParams& p, const CostWeights& w,
                                 const PiecewiseControl& control, const EpidemicState& x0,
                                 double step = kDefaultStep);

CostBreakdown cost_infinite(const EpidemicParams& p, const CostWeights& w,
                            const PiecewiseControl& control, const EpidemicState& x0,
                            double step = kDefaultStep);

}  // namespace epictrl

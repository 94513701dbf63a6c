#include "epictrl/cost.hpp"

#include <algorithm>
#include <cmath>

#include "epictrl/viability.hpp"

namespace epictrl {

void CostWeights::validate() const {
  if (!(lambda1 > 0.0)) throw Error(ErrorCode::PreconditionViolated, "lambda1 must be positive");
  if (!(lambda2 >= 0.0)) throw Error(ErrorCode::PreconditionViolated, "lambda2 must be >= 0");
}

double s_infinity(const EpidemicParams& p, const EpidemicState& x) {
  const double a = p.herd_threshold();
  const double level = x.s + x.i - a * std::log(x.s);
  auto f = [&](double z) { return z - a * std::log(z) - level; };

  double lo = 1e-15;
  double hi = a;
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (!(f_lo > 0.0) || !(f_hi <= 0.0))
    throw Error(ErrorCode::RootNotBracketed, "s_infinity root not bracketed in (0, gamma/beta)");
  if (f_hi == 0.0) return hi;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double tail_infected_integral(const EpidemicParams& p, const EpidemicState& x) {
  return (x.s + x.i - s_infinity(p, x)) / p.gamma;
}

CostBreakdown cost_finite(const EpidemicParams& /*p*/, const CostWeights& w,
                          const Trajectory& traj) {
  CostBreakdown out;
  double u_int = 0.0;
  double i_int = 0.0;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const auto& a = traj.samples[k - 1];
    const auto& b = traj.samples[k];
    const double h = b.t - a.t;
    u_int += 0.5 * h * (a.u + b.u_left);
    i_int += 0.5 * h * (a.i + b.i);
  }
  out.control_part = w.lambda1 * u_int;
  out.infection_part = w.lambda2 * i_int;
  out.total = out.control_part + out.infection_part;
  return out;
}

CostEvaluation evaluate_infinite(const EpidemicParams& p, const CostWeights& w,
                                 const PiecewiseControl& control, const EpidemicState& x0,
                                 double step) {
  w.validate();
  if (!control.terminal_zero)
    throw Error(ErrorCode::NonTerminatingControl, "infinite-horizon cost needs terminal_zero");
  if (std::isinf(control.end_time()))
    throw Error(ErrorCode::NonTerminatingControl, "last arc is unbounded");

  CostEvaluation out;
  out.trajectory = simulate(p, x0, control, control.end_time(), step);
  out.cost = cost_finite(p, w, out.trajectory);
  const EpidemicState end = out.trajectory.final_state();
  out.cost.tail_part = w.lambda2 > 0.0 ? w.lambda2 * tail_infected_integral(p, end) : 0.0;
  out.cost.total += out.cost.tail_part;
  out.max_i = std::max(out.trajectory.max_i(), free_peak(p, end));
  return out;
}

CostBreakdown cost_infinite(const EpidemicParams& p, const CostWeights& w,
                            const PiecewiseControl& control, const EpidemicState& x0,
                            double step) {
  return evaluate_infinite(p, w, control, x0, step).cost;
}

}  // namespace epictrl

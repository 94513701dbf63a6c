#include "epictrl/viability.hpp"

#include <cmath>

namespace epictrl {

std::string_view to_string(Zone zone) {
  switch (zone) {
    case Zone::Safe: return "Safe";
    case Zone::ViableNoLockdown: return "ViableNoLockdown";
    case Zone::ViableLockdown: return "ViableLockdown";
    case Zone::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

namespace {

// i on the constant-control trajectory through (s_ref, i_M) whose logarithmic
// slope coefficient is k, capped at i_M left of the junction.
double glued(double s, double s_junction, double s_ref, double k, double i_M) {
  if (s <= s_junction) return i_M;
  return i_M + (s_ref - s) + k * std::log(s / s_ref);
}

}  // namespace

double curve_value(const EpidemicParams& p, Curve which, double s) {
  if (!(s > 0.0)) throw Error(ErrorCode::NonPositiveS, "curve evaluated at s <= 0");
  const double herd = p.herd_threshold();
  const double ctrl = p.controlled_threshold();
  switch (which) {
    case Curve::Phi0: return glued(s, herd, herd, herd, p.i_M);
    case Curve::PhiMax: return glued(s, ctrl, ctrl, ctrl, p.i_M);
    case Curve::Psi0: return glued(s, ctrl, ctrl, herd, p.i_M);
  }
  return 0.0;
}

Zone classify(const EpidemicParams& p, const EpidemicState& x) {
  if (!in_triangle(x)) throw Error(ErrorCode::OutsideTriangle, "state outside the triangle");
  if (x.i <= curve_value(p, Curve::Phi0, x.s)) return Zone::Safe;
  if (x.i <= curve_value(p, Curve::Psi0, x.s)) return Zone::ViableNoLockdown;
  if (x.i <= curve_value(p, Curve::PhiMax, x.s)) return Zone::ViableLockdown;
  return Zone::Infeasible;
}

CriticalSusceptibles critical_susceptibles(const EpidemicParams& p) {
  return {p.herd_threshold(), p.controlled_threshold()};
}

double free_peak(const EpidemicParams& p, const EpidemicState& x) {
  const double herd = p.herd_threshold();
  if (x.s <= herd) return x.i;
  return x.i + x.s - herd + herd * (std::log(herd) - std::log(x.s));
}

}  // namespace epictrl

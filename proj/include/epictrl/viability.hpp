#pragma once

// Closed-form viability geometry in the (s, i) plane.
//
// Phi0   : zero-control trajectory through (gamma/beta, i_M), capped at i_M.
// PhiMax : u_max trajectory through (gamma/(beta-u_max), i_M), capped at i_M.
// Psi0   : zero-control trajectory through (gamma/(beta-u_max), i_M), capped.
//
// Below Phi0 the epidemic never exceeds i_M without any control; below PhiMax
// some admissible control keeps it there forever.

#include <string_view>

#include "epictrl/sir_core.hpp"

namespace epictrl {

enum class Curve { Phi0, PhiMax, Psi0 };

enum class Zone { Safe, ViableNoLockdown, ViableLockdown, Infeasible };

std::string_view to_string(Zone zone);

struct CriticalSusceptibles {
  double herd = 0.0;            // gamma / beta
  double max_controlled = 0.0;  // gamma / (beta - u_max)
};

/// Ordinate of the curve at s. Negative values are returned as is.
/// Throws Error(NonPositiveS) for s <= 0.
double curve_value(const EpidemicParams& p, Curve which, double s);

/// Boundary ties go to the safer zone. Throws Error(OutsideTriangle).
Zone classify(const EpidemicParams& p, const EpidemicState& x);

CriticalSusceptibles critical_susceptibles(const EpidemicParams& p);

/// Peak of i along the zero-control trajectory from x (x.i if already past gamma/beta).
double free_peak(const EpidemicParams& p, const EpidemicState& x);

}  // namespace epictrl

#pragma once

// Control synthesis: the greedy feedback strategy and members of the two
// structured families that contain the optimal controls of the linear-cost
// problem.
//
//   BangBang     0 | u_max | 0                               (sigma0, sigma1)
//   BoundaryArc  0 | u_max | boundary law | u_max | 0         (tau0, delta_sing, delta_post)
//
// In the boundary family the end of the first u_max arc (tau1) is not a knob:
// it is the time the u_max arc saturates the ICU constraint.

#include <optional>
#include <variant>

#include "epictrl/sir_core.hpp"

namespace epictrl {

struct BangBangKnobs {
  double sigma0 = 0.0;
  double sigma1 = 0.0;
};

struct BoundaryArcKnobs {
  double tau0 = 0.0;
  double delta_sing = 0.0;
  double delta_post = 0.0;
};

using StructureKnobs = std::variant<BangBangKnobs, BoundaryArcKnobs>;

enum class Family { BangBang, BoundaryArc };

inline Family family_of(const StructureKnobs& k) {
  return std::holds_alternative<BangBangKnobs>(k) ? Family::BangBang : Family::BoundaryArc;
}

/// Saturation is accepted when the u_max arc peaks within this distance of i_M.
inline constexpr double kSaturationTolerance = 1e-7;

/// u_max / (beta (beta - u_max) i_M): upper bound on the time spent on i = i_M.
double t_stab(const EpidemicParams& p);

/// beta - gamma / s on [gamma/beta, gamma/(beta-u_max)]; Error(OutOfSingularRange) outside.
double singular_value(const EpidemicParams& p, double s);

/// Minimal-effort strategy: 0 until the trajectory meets PhiMax, u_max while
/// s > gamma/(beta-u_max), the boundary law down to gamma/beta, 0 after.
/// Throws Error(InfeasibleStart) above PhiMax.
PiecewiseControl synthesize_greedy(const EpidemicParams& p, const EpidemicState& x0,
                                   double step = kDefaultStep);

/// First time the zero-control arc meets PhiMax (0 if it starts on or above
/// it); nullopt if it reaches herd immunity first.
std::optional<double> saturation_onset(const EpidemicParams& p, const EpidemicState& x0,
                                       double step = kDefaultStep);

PiecewiseControl build_bangbang(const EpidemicParams& p, const BangBangKnobs& knobs);

/// Where the boundary family stands after the free arc [0, tau0).
struct SaturationProbe {
  double tau0 = 0.0;
  EpidemicState at_tau0;
  double free_excess = 0.0;  // max(0, max_{[0,tau0]} i - i_M)
  double offset = 0.0;       // i(tau0) - PhiMax(s(tau0)); 0 when u_max saturates exactly
  double tau1 = 0.0;         // where the u_max arc peaks (or tau0 if already past the peak abscissa)
  EpidemicState at_tau1;

  bool saturates() const {
    return free_excess <= kSaturationTolerance && offset >= -kSaturationTolerance &&
           offset <= kSaturationTolerance;
  }
};

SaturationProbe probe_saturation(const EpidemicParams& p, const EpidemicState& x0, double tau0,
                                 double step = kDefaultStep);

/// Assembles the boundary-family control from a probe without checking saturation.
PiecewiseControl assemble_boundary(const EpidemicParams& p, const SaturationProbe& probe,
                                   const BoundaryArcKnobs& knobs);

/// Strict builder: Error(ConstraintViolated) if the free arc (or the u_max arc
/// started from above PhiMax) exceeds i_M, Error(NoSaturation) if the u_max
/// arc peaks below i_M.
PiecewiseControl build_boundary(const EpidemicParams& p, const EpidemicState& x0,
                                const BoundaryArcKnobs& knobs, double step = kDefaultStep);

PiecewiseControl build_control(const EpidemicParams& p, const EpidemicState& x0,
                               const StructureKnobs& knobs, double step = kDefaultStep);

}  // namespace epictrl

#pragma once

// Pontryagin necessary conditions for the linear-cost problem, checked along
// a simulated trajectory.
//
//   H    = lambda2 i + lambda1 u + eta (beta - u) s i - gamma p_i i,   eta = p_i - p_s
//   p_s' = -eta (beta - u) i
//   p_i' = -(lambda2 + eta (beta - u) s - gamma p_i) - mu'
//   psi  = eta s i;  u = 0 where psi < lambda1, u = u_max where psi > lambda1
//
// The costates are integrated backward from p(T) = 0 (normal case). On
// boundary panels (boundary law with |i - i_M| <= 1e-6) the multiplier
// density is max(gamma p_s - lambda2, 0), which keeps psi constant. The atoms
// of mu at the ends of a boundary run are reconstructed: at the exit so that
// psi = lambda1 just before it, at the entry so that psi = lambda1 where the
// preceding u_max arc starts (zero if no non-negative atom is needed).

#include <cstddef>
#include <vector>

#include "epictrl/cost.hpp"
#include "epictrl/sir_core.hpp"

namespace epictrl {

inline constexpr double kBoundaryTolerance = 1e-6;

struct AdjointSample {
  double t = 0.0;
  double p_s = 0.0;
  double p_i = 0.0;
  double eta = 0.0;
  double psi = 0.0;
  double mu_cum = 0.0;  // mu(t), right limit, mu(0-) = 0
  double dmu = 0.0;     // multiplier density on the panel starting here
};

enum class JunctionKind { Entry, Exit };

struct Junction {
  JunctionKind kind = JunctionKind::Entry;
  double t = 0.0;
  double atom = 0.0;       // jump of mu; p_i(t-) = p_i(t+) + atom
  double psi_left = 0.0;
  double psi_right = 0.0;
};

struct AdjointPath {
  std::vector<AdjointSample> samples;  // right limits at the trajectory samples
  std::vector<Junction> junctions;
  std::vector<bool> boundary_panel;    // one flag per panel [t_k, t_k+1]
  double T = 0.0;

  /// psi just before sample k (differs from samples[k].psi only at junctions).
  double psi_left(std::size_t k) const;
};

struct AdjointOptions {
  bool reconstruct_atoms = true;
};

/// Throws Error(InconsistentInputs) when the trajectory was not produced by
/// this control (sample values disagree with the control or the grid is not
/// aligned to the arcs).
AdjointPath integrate_adjoint(const EpidemicParams& p, const CostWeights& w,
                              const Trajectory& traj, const PiecewiseControl& control,
                              const AdjointOptions& options = {});

struct PmpTolerances {
  double sign = 1e-6;      // slack on psi <> lambda1 on bang arcs, relative to lambda1
  double singular = 1e-4;  // |psi - lambda1| on interior-control panels, relative to lambda1
};

struct PmpReport {
  double stationarity_fraction = 0.0;
  double singular_residual = 0.0;
  double hamiltonian_residual = 0.0;  // max |H - lambda2 i(T)| / hamiltonian_scale
  double hamiltonian_scale = 0.0;     // lambda2 i(T), or max_t lambda1 u when lambda2 i(T) = 0
  double hamiltonian_absolute = 0.0;  // max |H - lambda2 i(T)|
  double eta_min = 0.0;
  double psi_min = 0.0;
  bool p_s_monotone = false;
  double p_s_min = 0.0;
  double boundary_margin = 0.0;  // min (gamma p_s - lambda2) on boundary panels (inf if none)
  bool mu_nondecreasing = false;
  std::vector<double> junction_residuals;  // |psi - lambda1| at each switch, best side
  std::vector<double> switch_times;
  std::vector<Junction> junctions;
};

PmpReport verify_pmp(const EpidemicParams& p, const CostWeights& w, const AdjointPath& adjoint,
                     const Trajectory& traj, const PiecewiseControl& control,
                     const PmpTolerances& tol = {});

/// Horizon for the adjoint: the end of the last finite arc plus enough zero
/// control that the truncated tail's influence on the costates decays by
/// `decay`, rounded up to 10 days.
double verification_horizon(const EpidemicParams& p, const EpidemicState& x0,
                            const PiecewiseControl& control, double decay = 1e-5,
                            double step = kDefaultStep);

}  // namespace epictrl

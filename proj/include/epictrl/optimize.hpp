#pragma once

// Switching-time optimization over the two structured families.
//
// Each candidate is scored by its infinite-horizon cost plus 1e6 times the
// ICU violation (max i above i_M + 1e-6) and, for the boundary family, 1e6
// times the distance of the u_max peak from i_M. The search is a coarse grid
// evaluated with prefix-sharing walkers and closed-form tails, followed by
// Nelder-Mead refinement from the best grid points and the greedy seed.

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "epictrl/cost.hpp"
#include "epictrl/policy.hpp"

namespace epictrl {

inline constexpr double kFeasibilityTolerance = 1e-6;
inline constexpr double kPenaltyWeight = 1e6;

struct SearchOptions {
  double step = kDefaultStep;
  double grid_resolution = 2.0;  // days per knob on the coarse grid
  int singular_slices = 10;      // the boundary-arc budget is cut into this many slices
  int restarts = 5;              // simplex runs started from the best grid points
  int max_simplex_evaluations = 600;
};

struct FamilyOutcome {
  bool evaluated = false;
  StructureKnobs knobs;
  double objective = 0.0;  // penalized
  CostBreakdown cost;
  bool feasible = false;
};

struct OptimizationReport {
  StructureKnobs best_knobs;
  CostBreakdown best_cost;
  double objective = 0.0;
  std::array<double, 4> switch_times{};  // tau0..tau3; bang-bang reports (s0, s1, s1, s1)
  bool feasible = false;
  double max_i = 0.0;
  std::size_t evaluations = 0;
  FamilyOutcome bangbang;
  FamilyOutcome boundary;
  bool tie = false;
  PiecewiseControl control;
};

/// Minimizes the infinite-horizon cost over both families with every switch
/// in [0, horizon_hint]. Throws Error(InfeasibleStart) above PhiMax and
/// Error(PreconditionViolated) if horizon_hint is shorter than the greedy
/// control needs (see choose_horizon).
OptimizationReport optimize_structured(const EpidemicParams& p, const CostWeights& w,
                                       const EpidemicState& x0, double horizon_hint,
                                       const SearchOptions& options = {});

/// Same search for the finite-horizon cost int_0^T, with every switch <= T
/// and the ICU constraint enforced on [0, inf).
OptimizationReport optimize_finite_horizon(const EpidemicParams& p, const CostWeights& w,
                                           const EpidemicState& x0, double horizon,
                                           const SearchOptions& options = {});

/// Smallest T on a 10-day grid with s(T) < gamma/beta - margin.
/// Throws Error(NonTerminatingControl) without terminal_zero and
/// Error(HorizonNotFound) past 1e4 days.
double choose_horizon(const EpidemicParams& p, const EpidemicState& x0,
                      const PiecewiseControl& control, double margin = 0.01,
                      double step = kDefaultStep);

struct GammaDiagnostic {
  std::vector<double> horizons;
  std::vector<double> truncated_costs;  // J_inf of each finite-horizon optimum extended by zero
  std::vector<double> finite_costs;     // J_T of the same controls
  std::vector<double> terminal_s;       // s(T) under each finite-horizon optimum
  std::vector<bool> settled;            // terminal_s < gamma/beta
  double limit_cost = 0.0;
  double limit_horizon = 0.0;           // choose_horizon of the limit control

  double gap(std::size_t k) const;
  double relative_gap(std::size_t k) const;
  /// Index of the first settled horizon, or horizons.size().
  std::size_t first_settled() const;
};

/// Throws Error(PreconditionViolated) unless horizons increase and all are at
/// least the limit control's choose_horizon.
GammaDiagnostic gamma_diagnostic(const EpidemicParams& p, const CostWeights& w,
                                 const EpidemicState& x0, const std::vector<double>& horizons,
                                 const SearchOptions& options = {});

}  // namespace epictrl

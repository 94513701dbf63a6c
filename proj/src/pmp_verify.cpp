#include "epictrl/pmp_verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace epictrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Costate {
  double p_s = 0.0;
  double p_i = 0.0;
};

ControlLaw law_on(const PiecewiseControl& control, double t_mid) {
  for (const auto& arc : control.arcs)
    if (t_mid >= arc.t_start && t_mid < arc.t_end) return arc.law;
  return ConstantLaw{0.0};
}

class Backward {
 public:
  Backward(const EpidemicParams& p, const CostWeights& w, const Trajectory& traj,
           const PiecewiseControl& control)
      : p_(p), w_(w), s_(traj.samples) {
    const std::size_t panels = s_.size() > 0 ? s_.size() - 1 : 0;
    laws_.reserve(panels);
    boundary_.reserve(panels);
    mid_.reserve(panels);
    for (std::size_t k = 0; k < panels; ++k) {
      const double h = s_[k + 1].t - s_[k].t;
      const ControlLaw law = law_on(control, s_[k].t + 0.5 * h);
      laws_.push_back(law);
      boundary_.push_back(is_singular(law) && std::abs(s_[k].i - p.i_M) <= kBoundaryTolerance &&
                          std::abs(s_[k + 1].i - p.i_M) <= kBoundaryTolerance);
      mid_.push_back(rk4_step(p, law, s_[k].t, {s_[k].s, s_[k].i}, 0.5 * h));
    }
  }

  std::size_t panels() const { return laws_.size(); }
  const std::vector<bool>& boundary() const { return boundary_; }
  const ControlLaw& law(std::size_t k) const { return laws_[k]; }

  // One backward RK4 step over panel k from its right end; returns the
  // costate at its left end and the multiplier mass spent on the panel.
  Costate step(std::size_t k, const Costate& right, double& dmu_mass, double& dmu_left) const {
    const double t0 = s_[k].t;
    const double t1 = s_[k + 1].t;
    const double h = t1 - t0;
    const double tm = t0 + 0.5 * h;
    const EpidemicState x0{s_[k].s, s_[k].i};
    const EpidemicState x1{s_[k + 1].s, s_[k + 1].i};
    const EpidemicState& xm = mid_[k];
    const bool bnd = boundary_[k];
    const ControlLaw& law = laws_[k];

    auto rhs = [&](double t, const EpidemicState& x, const Costate& c, double& dmu) {
      const double u = law_value(p_, law, t);
      const double eta = c.p_i - c.p_s;
      dmu = bnd ? std::max(p_.gamma * c.p_s - w_.lambda2, 0.0) : 0.0;
      return Costate{-eta * (p_.beta - u) * x.i,
                     -(w_.lambda2 + eta * (p_.beta - u) * x.s - p_.gamma * c.p_i) - dmu};
    };
    auto axpy = [](const Costate& c, double a, const Costate& d) {
      return Costate{c.p_s + a * d.p_s, c.p_i + a * d.p_i};
    };

    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
    const Costate k1 = rhs(t1, x1, right, m1);
    const Costate k2 = rhs(tm, xm, axpy(right, -0.5 * h, k1), m2);
    const Costate k3 = rhs(tm, xm, axpy(right, -0.5 * h, k2), m3);
    const Costate k4 = rhs(t0, x0, axpy(right, -h, k3), m4);
    dmu_mass = h / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    const Costate left{right.p_s - h / 6.0 * (k1.p_s + 2.0 * k2.p_s + 2.0 * k3.p_s + k4.p_s),
                       right.p_i - h / 6.0 * (k1.p_i + 2.0 * k2.p_i + 2.0 * k3.p_i + k4.p_i)};
    double unused = 0.0;
    rhs(t0, x0, left, unused);
    dmu_left = unused;
    return left;
  }

  double psi(std::size_t k, const Costate& c) const {
    return (c.p_i - c.p_s) * s_[k].s * s_[k].i;
  }

  // psi at sample `to` after integrating back from sample `from` with value c.
  double psi_after(std::size_t from, std::size_t to, Costate c) const {
    double mass = 0.0, density = 0.0;
    for (std::size_t k = from; k-- > to;) c = step(k, c, mass, density);
    return psi(to, c);
  }

  const std::vector<TrajectorySample>& samples() const { return s_; }

 private:
  const EpidemicParams& p_;
  const CostWeights& w_;
  const std::vector<TrajectorySample>& s_;
  std::vector<ControlLaw> laws_;
  std::vector<bool> boundary_;
  std::vector<EpidemicState> mid_;
};

bool is_full_effort(const EpidemicParams& p, const ControlLaw& law) {
  const auto* c = std::get_if<ConstantLaw>(&law);
  return c != nullptr && std::abs(c->value - p.u_max) <= 1e-12;
}

void check_consistency(const EpidemicParams& p, const Trajectory& traj,
                       const PiecewiseControl& control) {
  if (traj.samples.empty() || traj.samples.front().t != 0.0)
    throw Error(ErrorCode::InconsistentInputs, "trajectory must start at t = 0");
  const double T = traj.samples.back().t;
  for (std::size_t k = 0; k + 1 < traj.samples.size(); ++k) {
    const auto& x = traj.samples[k];
    double u = 0.0;
    try {
      u = control_value_at(p, control, x.t);
    } catch (const Error&) {
      throw Error(ErrorCode::InconsistentInputs, "control undefined on the trajectory grid");
    }
    if (std::abs(u - x.u) > 1e-9)
      throw Error(ErrorCode::InconsistentInputs,
                  "trajectory control disagrees with the control at t = " + std::to_string(x.t));
  }
  for (const auto& arc : control.arcs) {
    if (arc.t_start <= 0.0 || arc.t_start >= T) continue;
    const bool on_grid = std::binary_search(
        traj.samples.begin(), traj.samples.end(), arc.t_start,
        [](const auto& a, const auto& b) {
          if constexpr (std::is_same_v<std::decay_t<decltype(a)>, double>)
            return a < b.t;
          else
            return a.t < b;
        });
    if (!on_grid)
      throw Error(ErrorCode::InconsistentInputs, "trajectory grid is not aligned to the arcs");
  }
}

}  // namespace

double AdjointPath::psi_left(std::size_t k) const {
  for (const auto& j : junctions)
    if (j.t == samples.at(k).t) return j.psi_left;
  return samples.at(k).psi;
}

AdjointPath integrate_adjoint(const EpidemicParams& p, const CostWeights& w,
                              const Trajectory& traj, const PiecewiseControl& control,
                              const AdjointOptions& options) {
  p.validate();
  w.validate();
  check_consistency(p, traj, control);

  const Backward back(p, w, traj, control);
  const auto& xs = back.samples();
  const std::size_t n = xs.size();
  const auto& bnd = back.boundary();

  AdjointPath out;
  out.T = xs.back().t;
  out.boundary_panel = bnd;
  out.samples.resize(n);
  std::vector<double> panel_mass(n, 0.0);
  std::vector<double> atom_at(n, 0.0);

  Costate c;  // p(T) = 0
  auto store = [&](std::size_t k, const Costate& v, double density) {
    auto& a = out.samples[k];
    a.t = xs[k].t;
    a.p_s = v.p_s;
    a.p_i = v.p_i;
    a.eta = v.p_i - v.p_s;
    a.psi = back.psi(k, v);
    a.dmu = density;
  };
  store(n - 1, c, 0.0);

  for (std::size_t k = n - 1; k-- > 0;) {
    double m = 0.0, density = 0.0;
    c = back.step(k, c, m, density);
    panel_mass[k] = m;
    store(k, c, bnd[k] ? density : 0.0);

    if (!options.reconstruct_atoms) continue;
    const bool exit_here = k > 0 && bnd[k - 1] && !bnd[k];
    const bool entry_here = k > 0 && bnd[k] && !bnd[k - 1];
    // A run ending exactly at T has no exit atom; it is handled at the last panel.
    if (exit_here) {
      const double si = xs[k].s * xs[k].i;
      const double target = xs[k].s > 0.0 ? c.p_s + w.lambda1 / si : c.p_i;
      const double atom = target - c.p_i;
      const double psi_right = back.psi(k, c);
      c.p_i = target;
      atom_at[k] = atom;
      out.junctions.push_back({JunctionKind::Exit, xs[k].t, atom, back.psi(k, c), psi_right});
    } else if (entry_here) {
      double atom = 0.0;
      if (is_full_effort(p, back.law(k - 1))) {
        std::size_t j = k - 1;
        while (j > 0 && !bnd[j - 1] && is_full_effort(p, back.law(j - 1))) --j;
        // psi at the start of the u_max run is affine in the atom.
        const double psi0 = back.psi_after(k, j, c);
        const double psi1 = back.psi_after(k, j, {c.p_s, c.p_i + 1.0});
        const double slope = psi1 - psi0;
        if (psi0 < w.lambda1 && slope > 0.0) atom = (w.lambda1 - psi0) / slope;
      }
      const double psi_right = back.psi(k, c);
      c.p_i += atom;
      atom_at[k] = atom;
      out.junctions.push_back({JunctionKind::Entry, xs[k].t, atom, back.psi(k, c), psi_right});
    }
  }
  std::reverse(out.junctions.begin(), out.junctions.end());

  double mu = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mu += atom_at[k];
    out.samples[k].mu_cum = mu;
    mu += panel_mass[k];
  }
  return out;
}

PmpReport verify_pmp(const EpidemicParams& p, const CostWeights& w, const AdjointPath& adjoint,
                     const Trajectory& traj, const PiecewiseControl& control,
                     const PmpTolerances& tol) {
  const auto& xs = traj.samples;
  const auto& ys = adjoint.samples;
  if (xs.size() != ys.size())
    throw Error(ErrorCode::InconsistentInputs, "adjoint and trajectory sizes differ");

  PmpReport r;
  r.junctions = adjoint.junctions;
  const double l1 = w.lambda1;
  const double sign_tol = tol.sign * l1;
  const double sing_tol = tol.singular * l1;
  const std::size_t n = xs.size();

  auto pattern_ok = [&](double u, double psi) {
    if (u <= 1e-12) return psi <= l1 + sign_tol;
    if (u >= p.u_max - 1e-12) return psi >= l1 - sign_tol;
    return std::abs(psi - l1) <= sing_tol;
  };

  double good = 0.0;
  double total = 0.0;
  r.eta_min = kInf;
  r.psi_min = kInf;
  r.p_s_min = kInf;
  r.boundary_margin = kInf;
  r.p_s_monotone = true;
  r.mu_nondecreasing = true;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double h = xs[k + 1].t - xs[k].t;
    const double u = xs[k].u;
    const bool ok = pattern_ok(u, ys[k].psi) && pattern_ok(xs[k + 1].u_left, adjoint.psi_left(k + 1));
    total += h;
    if (ok) good += h;
    const bool interior = u > 1e-12 && u < p.u_max - 1e-12;
    if (interior && k < adjoint.boundary_panel.size() && adjoint.boundary_panel[k]) {
      r.singular_residual = std::max(r.singular_residual, std::abs(ys[k].psi - l1));
      r.singular_residual =
          std::max(r.singular_residual, std::abs(adjoint.psi_left(k + 1) - l1));
      r.boundary_margin = std::min(r.boundary_margin, p.gamma * ys[k].p_s - w.lambda2);
    }
    if (ys[k + 1].p_s > ys[k].p_s + 1e-9) r.p_s_monotone = false;
    if (ys[k + 1].mu_cum < ys[k].mu_cum - 1e-12) r.mu_nondecreasing = false;
  }
  r.stationarity_fraction = total > 0.0 ? good / total : 1.0;

  const double iT = xs.back().i;
  const double k_const = w.lambda2 * iT;
  double running_max = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& x = xs[k];
    const auto& y = ys[k];
    const double H = w.lambda2 * x.i + l1 * x.u + y.eta * (p.beta - x.u) * x.s * x.i -
                     p.gamma * y.p_i * x.i;
    r.hamiltonian_absolute = std::max(r.hamiltonian_absolute, std::abs(H - k_const));
    running_max = std::max(running_max, l1 * x.u + w.lambda2 * x.i);
    r.eta_min = std::min(r.eta_min, y.eta);
    r.psi_min = std::min(r.psi_min, y.psi);
    r.p_s_min = std::min(r.p_s_min, y.p_s);
  }
  if (r.p_s_min < -1e-9) r.p_s_monotone = false;
  // Relative to the conserved value itself; with lambda2 = 0 (H = 0) the
  // running-cost scale is used instead.
  r.hamiltonian_scale = k_const > 0.0 ? k_const : running_max;
  r.hamiltonian_residual =
      r.hamiltonian_scale > 0.0 ? r.hamiltonian_absolute / r.hamiltonian_scale : 0.0;

  for (const auto& e : traj.events) {
    if (e.kind != EventKind::Switch) continue;
    const auto it = std::lower_bound(xs.begin(), xs.end(), e.t,
                                     [](const TrajectorySample& a, double t) { return a.t < t; });
    if (it == xs.end()) continue;
    const std::size_t k = static_cast<std::size_t>(it - xs.begin());
    r.switch_times.push_back(e.t);
    r.junction_residuals.push_back(
        std::min(std::abs(ys[k].psi - l1), std::abs(adjoint.psi_left(k) - l1)));
  }
  (void)control;
  return r;
}

double verification_horizon(const EpidemicParams& p, const EpidemicState& x0,
                            const PiecewiseControl& control, double decay, double step) {
  if (!control.terminal_zero)
    throw Error(ErrorCode::NonTerminatingControl, "verification needs a terminal_zero control");
  const double t_f = control.end_time();
  const Trajectory traj = simulate(p, x0, control, t_f, step);
  EpidemicState x = traj.final_state();
  double t = t_f;
  const double herd = p.herd_threshold();
  if (x.s > herd) {
    const auto r = advance_arc(p, ConstantLaw{0.0}, t, x, kInf, step,
                               [&](const EpidemicState& y) { return herd - y.s; });
    t = r.t;
    x = r.state;
  }
  const double rate = p.beta * (herd - s_infinity(p, x));
  const double T = t + std::log(1.0 / decay) / rate;
  return std::ceil(T / 10.0) * 10.0;
}

}  // namespace epictrl

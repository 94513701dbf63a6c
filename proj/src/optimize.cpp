#include "epictrl/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "epictrl/viability.hpp"

namespace epictrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Charged on any excess over i_M beyond integration noise, so that the
// feasibility tolerance is never traded for cost.
double violation_penalty(const EpidemicParams& p, double max_i) {
  constexpr double kNoise = 0.0;
  return kPenaltyWeight * std::max(0.0, max_i - p.i_M - kNoise);
}

double structural_penalty(double offset) {
  return kPenaltyWeight * std::max(0.0, std::abs(offset) - kSaturationTolerance);
}

// Integrates control arcs while accumulating the running integrals the cost
// needs, without storing the trajectory.
struct Walker {
  double t = 0.0;
  EpidemicState x;
  double u_int = 0.0;
  double i_int = 0.0;
  double max_i = 0.0;

  Walker(double t0, const EpidemicState& x0) : t(t0), x(x0), max_i(x0.i) {}

  void run(const EpidemicParams& p, const ControlLaw& law, double dt, double step) {
    if (!(dt > 0.0)) return;
    double t_prev = t;
    double i_prev = x.i;
    double u_prev = law_value(p, law, t);
    const bool constant = std::holds_alternative<ConstantLaw>(law);
    const auto r = advance_arc(p, law, t, x, t + dt, step, {},
                               [&](double tk, const EpidemicState& y) {
                                 const double h = tk - t_prev;
                                 i_int += 0.5 * h * (i_prev + y.i);
                                 if (!constant) {
                                   const double u = law_value(p, law, tk);
                                   u_int += 0.5 * h * (u_prev + u);
                                   u_prev = u;
                                 }
                                 max_i = std::max(max_i, y.i);
                                 t_prev = tk;
                                 i_prev = y.i;
                               });
    if (constant) u_int += u_prev * (r.t - t);
    t = r.t;
    x = r.state;
  }

  void run(const EpidemicParams& p, double u, double dt, double step) {
    run(p, ConstantLaw{u}, dt, step);
  }

  // Singular arc entered on the boundary: s follows the law exactly and i stays at i_M.
  bool ride(const EpidemicParams& p, const SingularBoundaryLaw& law, double dt) {
    if (!(dt > 0.0)) return true;
    const double sigma0 = law.s_at_tau2 + p.gamma * p.i_M * (law.tau2 - t);
    const double sigma1 = sigma0 - p.gamma * p.i_M * dt;
    if (!(sigma1 > 0.0)) return false;
    if (std::abs(x.i - p.i_M) > kRideTolerance * p.i_M) return false;
    if (std::abs(x.s - sigma0) > kRideTolerance * sigma0) return false;
    u_int += p.beta * dt + std::log(sigma1 / sigma0) / p.i_M;
    i_int += x.i * dt;
    x.s *= sigma1 / sigma0;
    t += dt;
    return true;
  }

  static constexpr double kRideTolerance = 1e-9;
};

struct Scored {
  StructureKnobs knobs;
  double objective = kInf;
  CostBreakdown cost;
  double max_i = 0.0;
  bool feasible = false;
  double tau1 = 0.0;  // end of the first u_max arc (boundary family)
  PiecewiseControl control;
};

struct Ranked {
  double objective;
  StructureKnobs knobs;
};

// The best `capacity` candidates seen so far.
class TopK {
 public:
  explicit TopK(std::size_t capacity) : capacity_(capacity) {}

  double cutoff() const { return items_.size() < capacity_ ? kInf : items_.back().objective; }

  void offer(double objective, const StructureKnobs& knobs) {
    if (!(objective < cutoff())) return;
    auto pos = std::upper_bound(items_.begin(), items_.end(), objective,
                                [](double v, const Ranked& r) { return v < r.objective; });
    items_.insert(pos, Ranked{objective, knobs});
    if (items_.size() > capacity_) items_.pop_back();
  }

  const std::vector<Ranked>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::vector<Ranked> items_;
};

std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& start,
    const std::vector<double>& scale, int max_evals, int& evals) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  for (std::size_t k = 0; k < n; ++k) simplex[k + 1][k] += scale[k];
  for (std::size_t k = 0; k <= n; ++k) {
    values[k] = f(simplex[k]);
    ++evals;
  }

  auto combine = [&](const std::vector<double>& a, const std::vector<double>& b, double c) {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = a[j] + c * (b[j] - a[j]);
    return out;
  };

  int used = static_cast<int>(n + 1);
  while (used < max_evals) {
    std::vector<std::size_t> order(n + 1);
    for (std::size_t k = 0; k <= n; ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double size = 0.0;
    for (std::size_t k = 0; k <= n; ++k)
      for (std::size_t j = 0; j < n; ++j)
        size = std::max(size, std::abs(simplex[k][j] - simplex[best][j]));
    const double spread = values[worst] - values[best];
    if (size < 1e-7 || spread <= 1e-13 * (1.0 + std::abs(values[best]))) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[k][j] / static_cast<double>(n);
    }

    auto eval = [&](const std::vector<double>& x) {
      ++used;
      ++evals;
      return f(x);
    };

    const auto reflected = combine(centroid, simplex[worst], -1.0);
    const double f_r = eval(reflected);
    if (f_r < values[best]) {
      const auto expanded = combine(centroid, simplex[worst], -2.0);
      const double f_e = eval(expanded);
      if (f_e < f_r) {
        simplex[worst] = expanded;
        values[worst] = f_e;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_r;
      }
      continue;
    }
    if (f_r < values[second]) {
      simplex[worst] = reflected;
      values[worst] = f_r;
      continue;
    }
    const bool outside = f_r < values[worst];
    const auto contracted = outside ? combine(centroid, reflected, 0.5)
                                    : combine(centroid, simplex[worst], 0.5);
    const double f_c = eval(contracted);
    if (f_c < std::min(f_r, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_c;
      continue;
    }
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == best) continue;
      simplex[k] = combine(simplex[best], simplex[k], 0.5);
      values[k] = eval(simplex[k]);
    }
  }

  std::size_t best = 0;
  for (std::size_t k = 1; k <= n; ++k)
    if (values[k] < values[best]) best = k;
  return {simplex[best], values[best]};
}

// Triangle wave mapping the real line onto [0, width].
double fold(double v, double width) {
  if (!(width > 0.0)) return 0.0;
  const double period = 2.0 * width;
  double r = std::fmod(std::abs(v), period);
  return r <= width ? r : period - r;
}

bool same_knobs(const StructureKnobs& a, const StructureKnobs& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<BangBangKnobs>(&a)) {
    const auto& y = std::get<BangBangKnobs>(b);
    return x->sigma0 == y.sigma0 && x->sigma1 == y.sigma1;
  }
  const auto& x = std::get<BoundaryArcKnobs>(a);
  const auto& y = std::get<BoundaryArcKnobs>(b);
  return x.tau0 == y.tau0 && x.delta_sing == y.delta_sing && x.delta_post == y.delta_post;
}

class Search {
 public:
  Search(const EpidemicParams& p, const CostWeights& w, const EpidemicState& x0, double window,
         bool finite, const SearchOptions& options)
      : p_(p), w_(w), x0_(x0), window_(window), finite_(finite), opt_(options) {}

  OptimizationReport run() {
    onset_ = saturation_onset(p_, x0_, opt_.step);

    TopK bb(static_cast<std::size_t>(std::max(1, opt_.restarts)));
    TopK ba(static_cast<std::size_t>(std::max(1, opt_.restarts)));
    seed(bb, ba);
    grid_bangbang(bb);
    grid_boundary(ba);

    OptimizationReport report;
    report.bangbang = refine(bb, Family::BangBang);
    report.boundary = refine(ba, Family::BoundaryArc);

    const FamilyOutcome& b = report.bangbang;
    const FamilyOutcome& s = report.boundary;
    const double tie_tol = 1e-9 * std::max(1.0, std::abs(b.objective));
    report.tie = b.evaluated && s.evaluated && std::abs(b.objective - s.objective) <= tie_tol;
    const bool pick_bb = !s.evaluated || (b.evaluated && b.objective <= s.objective + tie_tol);

    const Scored winner = score(pick_bb ? b.knobs : s.knobs);
    report.best_knobs = winner.knobs;
    report.best_cost = winner.cost;
    report.objective = winner.objective;
    report.feasible = winner.feasible;
    report.max_i = winner.max_i;
    report.control = winner.control;
    report.switch_times = switch_times(winner);
    report.evaluations = evaluations_;
    return report;
  }

  // Full evaluation by simulation with knobs clamped to the search window.
  Scored score(const StructureKnobs& raw) {
    ++evaluations_;
    Scored out;
    double structural = 0.0;
    if (const auto* k = std::get_if<BangBangKnobs>(&raw)) {
      BangBangKnobs c;
      c.sigma0 = std::clamp(k->sigma0, 0.0, window_);
      c.sigma1 = std::clamp(k->sigma1, c.sigma0, window_);
      out.knobs = c;
      out.control = build_bangbang(p_, c);
    } else {
      const auto& k2 = std::get<BoundaryArcKnobs>(raw);
      BoundaryArcKnobs c;
      c.tau0 = std::clamp(k2.tau0, 0.0, window_);
      const SaturationProbe probe = probe_saturation(p_, x0_, c.tau0, opt_.step);
      structural = structural_penalty(probe.offset);
      if (probe.tau1 > window_) structural += kPenaltyWeight * (probe.tau1 - window_);
      const double budget =
          std::max(0.0, (probe.at_tau1.s - p_.herd_threshold()) / (p_.gamma * p_.i_M));
      const double room = std::max(0.0, window_ - probe.tau1);
      c.delta_sing = std::clamp(k2.delta_sing, 0.0, std::min(budget, room));
      c.delta_post = std::clamp(k2.delta_post, 0.0, std::max(0.0, room - c.delta_sing));
      out.knobs = c;
      out.tau1 = probe.tau1;
      out.control = assemble_boundary(p_, probe, c);
    }

    Walker wk(0.0, x0_);
    for (const auto& arc : out.control.arcs) {
      const double end = finite_ ? std::min(arc.t_end, window_) : arc.t_end;
      const auto* sing = std::get_if<SingularBoundaryLaw>(&arc.law);
      if (!sing || !wk.ride(p_, *sing, end - arc.t_start))
        wk.run(p_, arc.law, end - arc.t_start, opt_.step);
    }
    if (finite_ && wk.t < window_) wk.run(p_, 0.0, window_ - wk.t, opt_.step);
    out.cost.control_part = w_.lambda1 * wk.u_int;
    out.cost.infection_part = w_.lambda2 * wk.i_int;
    if (!finite_ && w_.lambda2 > 0.0)
      out.cost.tail_part = w_.lambda2 * tail_infected_integral(p_, wk.x);
    out.cost.total = out.cost.control_part + out.cost.infection_part + out.cost.tail_part;
    out.max_i = std::max(wk.max_i, free_peak(p_, wk.x));
    out.objective = out.cost.total + violation_penalty(p_, out.max_i) + structural;
    out.feasible = structural == 0.0 && out.max_i <= p_.i_M + kFeasibilityTolerance;
    return out;
  }

 private:
  double running(const Walker& wk) const { return w_.lambda1 * wk.u_int + w_.lambda2 * wk.i_int; }

  double lower_bound(const Walker& wk) const {
    return running(wk) + violation_penalty(p_, wk.max_i);
  }

  // Objective of a walker state followed by zero control.
  double finish(const Walker& wk) {
    ++evaluations_;
    double total = running(wk);
    const double peak = std::max(wk.max_i, free_peak(p_, wk.x));
    if (finite_) {
      if (w_.lambda2 > 0.0 && wk.t < window_) {
        Walker tail = wk;
        tail.i_int = 0.0;
        tail.run(p_, 0.0, window_ - wk.t, opt_.step);
        total += w_.lambda2 * tail.i_int;
      }
    } else if (w_.lambda2 > 0.0) {
      total += w_.lambda2 * tail_infected_integral(p_, wk.x);
    }
    return total + violation_penalty(p_, peak);
  }

  void seed(TopK& bb, TopK& ba) {
    const Scored zero = score(BangBangKnobs{0.0, 0.0});
    bb.offer(zero.objective, zero.knobs);
    if (onset_) {
      const Scored g = score(BoundaryArcKnobs{*onset_, kInf, 0.0});
      ba.offer(g.objective, g.knobs);
    }
  }

  std::size_t grid_points(double length) const {
    return static_cast<std::size_t>(std::floor(length / opt_.grid_resolution + 1e-9));
  }

  void grid_bangbang(TopK& top) {
    const double res = opt_.grid_resolution;
    Walker free(0.0, x0_);
    const std::size_t n0 = grid_points(window_);
    for (std::size_t a = 0; a <= n0; ++a) {
      const double sigma0 = static_cast<double>(a) * res;
      if (a > 0) free.run(p_, 0.0, sigma0 - free.t, opt_.step);
      if (lower_bound(free) >= top.cutoff()) break;
      Walker wk = free;
      const std::size_t n1 = grid_points(window_ - sigma0);
      for (std::size_t b = 0; b <= n1; ++b) {
        const double sigma1 = sigma0 + static_cast<double>(b) * res;
        if (b > 0) wk.run(p_, p_.u_max, sigma1 - wk.t, opt_.step);
        if (lower_bound(wk) >= top.cutoff()) break;
        top.offer(finish(wk), BangBangKnobs{sigma0, sigma1});
      }
    }
  }

  void grid_boundary(TopK& top) {
    if (onset_) saturated_candidates(top, *onset_);
    // Off-onset starts cannot saturate; they only enter through the penalty.
    const double res = opt_.grid_resolution;
    Walker free(0.0, x0_);
    const std::size_t n0 = grid_points(window_);
    for (std::size_t a = 0; a <= n0; ++a) {
      const double tau0 = static_cast<double>(a) * res;
      if (a > 0) free.run(p_, 0.0, tau0 - free.t, opt_.step);
      const double offset = free.x.i - curve_value(p_, Curve::PhiMax, free.x.s);
      if (lower_bound(free) + structural_penalty(offset) >= top.cutoff()) continue;
      const Scored sc = score(BoundaryArcKnobs{tau0, kInf, 0.0});
      top.offer(sc.objective, sc.knobs);
    }
  }

  void saturated_candidates(TopK& top, double tau0) {
    const SaturationProbe probe = probe_saturation(p_, x0_, tau0, opt_.step);
    if (probe.tau1 > window_) return;
    Walker head(0.0, x0_);
    head.run(p_, 0.0, tau0, opt_.step);
    head.run(p_, p_.u_max, probe.tau1 - tau0, opt_.step);
    const double structural = structural_penalty(probe.offset);

    const double s1 = probe.at_tau1.s;
    const double i1 = probe.at_tau1.i;
    const double budget = std::max(0.0, (s1 - p_.herd_threshold()) / (p_.gamma * p_.i_M));
    const int slices = std::max(1, opt_.singular_slices);
    const double res = opt_.grid_resolution;
    for (int j = 0; j <= slices; ++j) {
      const double delta =
          std::min(budget * static_cast<double>(j) / slices, window_ - probe.tau1);
      const double s2 = s1 - p_.gamma * p_.i_M * delta;
      Walker wk = head;
      wk.t = probe.tau1 + delta;
      wk.x = {s2, i1};
      wk.u_int += p_.beta * delta - std::log(s1 / s2) / p_.i_M;
      wk.i_int += i1 * delta;
      wk.max_i = std::max(wk.max_i, i1);
      const double tau2 = wk.t;
      const std::size_t n = grid_points(window_ - tau2);
      for (std::size_t b = 0; b <= n; ++b) {
        const double post = static_cast<double>(b) * res;
        if (b > 0) wk.run(p_, p_.u_max, tau2 + post - wk.t, opt_.step);
        if (lower_bound(wk) + structural >= top.cutoff()) break;
        top.offer(finish(wk) + structural, BoundaryArcKnobs{tau0, delta, post});
      }
    }
  }

  FamilyOutcome refine(const TopK& top, Family family) {
    FamilyOutcome out;
    if (top.items().empty()) return out;
    Scored best;
    auto consider = [&](const StructureKnobs& k) {
      Scored sc = score(k);
      if (sc.objective < best.objective) best = std::move(sc);
    };
    // Simpler members of the family win whenever they cost no more; the
    // landscape is flat where the boundary law is close to zero.
    auto prefer = [&](const StructureKnobs& k) {
      if (same_knobs(k, best.knobs)) return;
      Scored sc = score(k);
      if (sc.objective <= best.objective + 1e-9 * (1.0 + std::abs(best.objective)))
        best = std::move(sc);
    };
    auto consider_clean = [&](const StructureKnobs& k) {
      consider(k);
      if (const auto* b = std::get_if<BangBangKnobs>(&best.knobs)) {
        prefer(BangBangKnobs{b->sigma0, b->sigma0});
      } else {
        const auto a = std::get<BoundaryArcKnobs>(best.knobs);
        prefer(BoundaryArcKnobs{a.tau0, a.delta_sing, 0.0});
        prefer(BoundaryArcKnobs{a.tau0, kInf, 0.0});
      }
    };

    const double res = opt_.grid_resolution;
    std::vector<StructureKnobs> started;
    for (const auto& start : top.items()) {
      if (std::any_of(started.begin(), started.end(),
                      [&](const StructureKnobs& k) { return same_knobs(k, start.knobs); }))
        continue;
      started.push_back(start.knobs);
      consider(start.knobs);
      int evals = 0;
      if (family == Family::BangBang) {
        const auto& k = std::get<BangBangKnobs>(start.knobs);
        auto make = [](const std::vector<double>& v) {
          const double s0 = std::abs(v[0]);
          return BangBangKnobs{s0, s0 + std::abs(v[1])};
        };
        auto f = [&](const std::vector<double>& v) { return score(make(v)).objective; };
        const auto [x, fx] = nelder_mead(f, {k.sigma0, k.sigma1 - k.sigma0}, {res, res},
                                         opt_.max_simplex_evaluations, evals);
        consider_clean(make(x));
      } else {
        const auto& k = std::get<BoundaryArcKnobs>(start.knobs);
        const SaturationProbe probe = probe_saturation(p_, x0_, k.tau0, opt_.step);
        const double budget =
            std::max(0.0, (probe.at_tau1.s - p_.herd_threshold()) / (p_.gamma * p_.i_M));
        // Reflecting the coordinates keeps the simplex off the flat regions
        // that clamping would create.
        auto make = [budget](const std::vector<double>& v) {
          return BoundaryArcKnobs{v[0], fold(v[1], budget), std::abs(v[2])};
        };
        auto f = [&](const std::vector<double>& v) { return score(make(v)).objective; };
        const double sing_scale =
            std::min(std::max(res, budget / opt_.singular_slices), std::max(budget, res));
        const double start_sing = std::min(k.delta_sing, budget);
        const auto [x, fx] = nelder_mead(f, {k.tau0, start_sing, k.delta_post},
                                         {1e-2, sing_scale, res}, opt_.max_simplex_evaluations,
                                         evals);
        consider_clean(make(x));
        if (onset_) {
          BoundaryArcKnobs snapped = make(x);
          snapped.tau0 = *onset_;
          consider_clean(snapped);
        }
      }
    }

    out.evaluated = true;
    out.knobs = best.knobs;
    out.objective = best.objective;
    out.cost = best.cost;
    out.feasible = best.feasible;
    return out;
  }

  std::array<double, 4> switch_times(const Scored& sc) const {
    if (const auto* k = std::get_if<BangBangKnobs>(&sc.knobs))
      return {k->sigma0, k->sigma1, k->sigma1, k->sigma1};
    const auto& k = std::get<BoundaryArcKnobs>(sc.knobs);
    const double tau1 = sc.tau1;
    const double tau2 = tau1 + k.delta_sing;
    return {k.tau0, tau1, tau2, tau2 + k.delta_post};
  }

  EpidemicParams p_;
  CostWeights w_;
  EpidemicState x0_;
  double window_;
  bool finite_;
  SearchOptions opt_;
  std::optional<double> onset_;
  std::size_t evaluations_ = 0;
};

void check_search_inputs(const EpidemicParams& p, const CostWeights& w, const EpidemicState& x0,
                         const SearchOptions& options) {
  p.validate();
  w.validate();
  if (classify(p, x0) == Zone::Infeasible)
    throw Error(ErrorCode::InfeasibleStart, "initial state lies above PhiMax");
  if (!(options.step > 0.0) || !(options.grid_resolution > 0.0))
    throw Error(ErrorCode::PreconditionViolated, "step and grid resolution must be positive");
}

}  // namespace

OptimizationReport optimize_structured(const EpidemicParams& p, const CostWeights& w,
                                       const EpidemicState& x0, double horizon_hint,
                                       const SearchOptions& options) {
  check_search_inputs(p, w, x0, options);
  const double needed = choose_horizon(p, x0, synthesize_greedy(p, x0, options.step), 0.01,
                                       options.step);
  if (!(horizon_hint >= needed))
    throw Error(ErrorCode::PreconditionViolated,
                "horizon hint " + std::to_string(horizon_hint) + " is shorter than the " +
                    std::to_string(needed) + " days the greedy control needs");
  return Search(p, w, x0, horizon_hint, false, options).run();
}

OptimizationReport optimize_finite_horizon(const EpidemicParams& p, const CostWeights& w,
                                           const EpidemicState& x0, double horizon,
                                           const SearchOptions& options) {
  check_search_inputs(p, w, x0, options);
  if (!(horizon > 0.0)) throw Error(ErrorCode::PreconditionViolated, "horizon must be positive");
  return Search(p, w, x0, horizon, true, options).run();
}

double choose_horizon(const EpidemicParams& p, const EpidemicState& x0,
                      const PiecewiseControl& control, double margin, double step) {
  constexpr double kGrid = 10.0;
  constexpr double kLimit = 1e4;
  if (!control.terminal_zero)
    throw Error(ErrorCode::NonTerminatingControl, "choose_horizon needs a terminal_zero control");
  p.validate();
  validate_state(x0);
  control.validate(p);
  const double target = p.herd_threshold() - margin;
  if (x0.s < target) return 0.0;

  auto stop = [&](const EpidemicState& y) { return target - y.s; };
  double t_cross = kInf;
  EpidemicState x = x0;
  for (const auto& arc : control.arcs) {
    if (arc.t_end <= arc.t_start) continue;
    if (arc.t_start >= kLimit) break;
    const auto r = advance_arc(p, arc.law, arc.t_start, x, std::min(arc.t_end, kLimit), step, stop);
    x = r.state;
    if (r.stopped) {
      t_cross = r.t;
      break;
    }
  }
  if (!std::isfinite(t_cross)) {
    const double t0 = control.end_time();
    if (t0 < kLimit) {
      const auto r = advance_arc(p, ConstantLaw{0.0}, t0, x, kLimit, step, stop);
      if (r.stopped) t_cross = r.t;
    }
  }
  const double horizon = (std::floor(t_cross / kGrid) + 1.0) * kGrid;
  if (!std::isfinite(t_cross) || horizon > kLimit)
    throw Error(ErrorCode::HorizonNotFound, "s does not fall below gamma/beta - margin in 1e4 days");
  return horizon;
}

double GammaDiagnostic::gap(std::size_t k) const {
  return std::abs(truncated_costs.at(k) - limit_cost);
}

double GammaDiagnostic::relative_gap(std::size_t k) const {
  const double g = gap(k);
  if (g == 0.0) return 0.0;
  return g / std::max(std::abs(limit_cost), std::numeric_limits<double>::min());
}

std::size_t GammaDiagnostic::first_settled() const {
  for (std::size_t k = 0; k < settled.size(); ++k)
    if (settled[k]) return k;
  return horizons.size();
}

GammaDiagnostic gamma_diagnostic(const EpidemicParams& p, const CostWeights& w,
                                 const EpidemicState& x0, const std::vector<double>& horizons,
                                 const SearchOptions& options) {
  if (horizons.empty()) throw Error(ErrorCode::PreconditionViolated, "no horizons given");
  for (std::size_t k = 1; k < horizons.size(); ++k)
    if (!(horizons[k] > horizons[k - 1]))
      throw Error(ErrorCode::PreconditionViolated, "horizons must be increasing");
  check_search_inputs(p, w, x0, options);

  GammaDiagnostic out;
  out.horizons = horizons;
  const double greedy_horizon =
      choose_horizon(p, x0, synthesize_greedy(p, x0, options.step), 0.01, options.step);
  const OptimizationReport limit = optimize_structured(
      p, w, x0, std::max(horizons.back(), greedy_horizon), options);
  out.limit_cost = limit.best_cost.total;
  out.limit_horizon = choose_horizon(p, x0, limit.control, 0.01, options.step);
  if (horizons.front() < out.limit_horizon)
    throw Error(ErrorCode::PreconditionViolated,
                "horizon " + std::to_string(horizons.front()) +
                    " is shorter than the limit control's horizon " +
                    std::to_string(out.limit_horizon));

  for (double T : horizons) {
    const OptimizationReport fin = optimize_finite_horizon(p, w, x0, T, options);
    out.finite_costs.push_back(fin.best_cost.total);
    out.truncated_costs.push_back(cost_infinite(p, w, fin.control, x0, options.step).total);
    const double sT = simulate(p, x0, fin.control, T, options.step).back().s;
    out.terminal_s.push_back(sT);
    out.settled.push_back(sT < p.herd_threshold());
  }
  return out;
}

}  // namespace epictrl

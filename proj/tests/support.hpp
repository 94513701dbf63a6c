#pragma once

// Reference computations used as oracles by the test suites. Nothing here
// calls into the library beyond its plain data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "epictrl/sir_core.hpp"

namespace epictrl::testing {

inline EpidemicParams italy() { return {0.2142, 0.0714, 0.135, 0.0031}; }
inline EpidemicParams delta() { return {0.5, 0.0714, 0.315, 0.021}; }
inline EpidemicParams italy_no_icu() { return {0.2142, 0.0714, 0.135, 1.0}; }
inline EpidemicState italy_start() { return {0.94, 0.001}; }
inline EpidemicState delta_start() { return {0.5, 0.001}; }

// Values computed offline with an adaptive 8th-order integrator (rtol 1e-13)
// and the closed-form singular-arc identities.
namespace frozen {
inline constexpr double italy_tau0 = 6.705087770847748;
inline constexpr double italy_tau1 = 181.97595761325633;
inline constexpr double italy_tau2 = 2748.9851659886895;
inline constexpr double italy_greedy_cost_l0 = 252.5685336713659;
inline constexpr double italy_greedy_cost_l1 = 261.68736454327336;
inline constexpr double italy_greedy_cost_l5 = 298.16268803090304;
inline constexpr double italy_greedy_cost_l8 = 325.51918064662533;
inline constexpr double italy_t_stab = 2567.0092083754325;
inline constexpr double delta_tau0 = 12.733796129093;
inline constexpr double delta_tau1 = 90.00252989566305;
inline constexpr double delta_tau2 = 252.16469205782522;
inline constexpr double delta_greedy_cost_l30 = 235.52241127397406;
inline constexpr double delta_t_stab = 162.16216216216216;
inline constexpr double italy_phi0_094 = -0.2579877050166592;
inline constexpr double italy_phimax_094 = 0.0023012126140433825;
inline constexpr double italy_psi0_094 = -0.02145050656593033;
inline constexpr double italy_phimax_099 = -0.000977703477731337;
inline constexpr double italy_sinf_start = 0.0686334672897939;
inline constexpr double italy_sinf_herd = 0.2899154757458095;
inline constexpr double italy_tail_herd = 0.6515106104695217;
}  // namespace frozen

struct RefState {
  double s;
  double i;
  double q;  // running integral of i
};

// Classical RK4 on (s, i, int i) with a time-dependent effort.
class RefIntegrator {
 public:
  RefIntegrator(double beta, double gamma) : beta_(beta), gamma_(gamma) {}

  RefState step(const std::function<double(double)>& u, double t, const RefState& x,
                double h) const {
    auto f = [&](double tt, const RefState& y) {
      const double c = beta_ - u(tt);
      return RefState{-c * y.s * y.i, c * y.s * y.i - gamma_ * y.i, y.i};
    };
    auto add = [](const RefState& a, const RefState& b, double k) {
      return RefState{a.s + k * b.s, a.i + k * b.i, a.q + k * b.q};
    };
    const RefState k1 = f(t, x);
    const RefState k2 = f(t + h / 2, add(x, k1, h / 2));
    const RefState k3 = f(t + h / 2, add(x, k2, h / 2));
    const RefState k4 = f(t + h, add(x, k3, h));
    return {x.s + h / 6 * (k1.s + 2 * k2.s + 2 * k3.s + k4.s),
            x.i + h / 6 * (k1.i + 2 * k2.i + 2 * k3.i + k4.i),
            x.q + h / 6 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q)};
  }

  // Integrates a constant effort from t0 to t1 with steps close to h.
  RefState run(double u, double t0, const RefState& x, double t1, double h,
               double* max_i = nullptr) const {
    if (t1 <= t0) return x;
    const int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / h - 1e-9)));
    const double dt = (t1 - t0) / n;
    RefState y = x;
    auto law = [u](double) { return u; };
    for (int k = 0; k < n; ++k) {
      y = step(law, t0 + k * dt, y, dt);
      if (max_i) *max_i = std::max(*max_i, y.i);
    }
    return y;
  }

 private:
  double beta_;
  double gamma_;
};

// Root of z - a ln z = s + i - a ln s on (0, a) by Newton from the left end,
// safeguarded with bisection.
inline double ref_s_infinity(double a, double s, double i) {
  const double level = s + i - a * std::log(s);
  auto f = [&](double z) { return z - a * std::log(z) - level; };
  double lo = 1e-300;
  double hi = a;
  double z = std::min(s, a) * 0.5;
  for (int it = 0; it < 200; ++it) {
    const double fz = f(z);
    if (fz > 0) lo = z; else hi = z;
    double next = z - fz / (1.0 - a / z);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - z) < 1e-16 * std::max(1.0, z)) return next;
    z = next;
  }
  return z;
}

// Peak of i along the uncontrolled orbit through (s, i).
inline double ref_free_peak(double a, double s, double i) {
  return s <= a ? i : i + s - a + a * std::log(a / s);
}

// i on the closed-form curves.
inline double ref_phi0(const EpidemicParams& p, double s) {
  const double a = p.gamma / p.beta;
  return s < a ? p.i_M : a + p.i_M - s + a * std::log(s / a);
}
inline double ref_phimax(const EpidemicParams& p, double s) {
  const double k = p.gamma / (p.beta - p.u_max);
  return s < k ? p.i_M : k + p.i_M - s + k * std::log(s / k);
}
inline double ref_psi0(const EpidemicParams& p, double s) {
  const double a = p.gamma / p.beta;
  const double k = p.gamma / (p.beta - p.u_max);
  return s < k ? p.i_M : k + p.i_M - s + a * std::log(s / k);
}

inline bool close_rel(double x, double y, double rel) {
  return std::abs(x - y) <= rel * std::max(std::abs(x), std::abs(y));
}

}  // namespace epictrl::testing

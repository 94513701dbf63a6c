#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "epictrl/optimize.hpp"
#include "support.hpp"

using namespace epictrl;
using namespace epictrl::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

double sigma_gap(const OptimizationReport& r) {
  const auto& k = std::get<BangBangKnobs>(r.best_knobs);
  return k.sigma1 - k.sigma0;
}

}  // namespace

TEST_CASE("choose_horizon for greedy Italy") {
  const auto p = italy();
  const auto g = synthesize_greedy(p, italy_start());
  const double T = choose_horizon(p, italy_start(), g);
  CHECK(std::fmod(T, 10.0) == 0.0);
  const auto traj = simulate(p, italy_start(), g, T);
  CHECK(traj.back().s < p.herd_threshold() - 0.01);
  const auto before = simulate(p, italy_start(), g, T - 10.0);
  CHECK(before.back().s >= p.herd_threshold() - 0.01);
}

TEST_CASE("choose_horizon agrees with the simulated herd crossing") {
  const auto p = italy();
  const PiecewiseControl zero{{}, true};
  const double T = choose_horizon(p, italy_start(), zero, 0.0);
  const double t_herd = simulate(p, italy_start(), zero, 500.0).first_event(EventKind::HerdCross);
  CHECK(T - 10.0 < t_herd);
  CHECK(t_herd <= T);
}

TEST_CASE("choose_horizon preconditions") {
  const auto p = italy();
  PiecewiseControl forever{{ControlArc{0.0, std::numeric_limits<double>::infinity(),
                                       ConstantLaw{p.u_max}}},
                           false};
  CHECK(code_of([&] { choose_horizon(p, italy_start(), forever); }) ==
        ErrorCode::NonTerminatingControl);
  // Holding u_max for 1e4 days keeps s above the herd threshold the whole time.
  const auto long_lock = build_bangbang(p, {0.0, 1.2e4});
  CHECK(code_of([&] { choose_horizon(p, italy_start(), long_lock); }) ==
        ErrorCode::HorizonNotFound);
}

TEST_CASE("no ICU: small infection weight leaves the epidemic alone") {
  const auto p = italy_no_icu();
  for (double l2 : {0.0, 2.0}) {
    const auto r = optimize_structured(p, {1.0, l2}, italy_start(), 600.0);
    REQUIRE(family_of(r.best_knobs) == Family::BangBang);
    CHECK(sigma_gap(r) == doctest::Approx(0.0));
    CHECK(r.best_cost.control_part == doctest::Approx(0.0));
    CHECK(r.feasible);
  }
}

TEST_CASE("no ICU: lambda2 = 6 gives a genuine lockdown") {
  const auto p = italy_no_icu();
  const auto r = optimize_structured(p, {1.0, 6.0}, italy_start(), 600.0);
  REQUIRE(family_of(r.best_knobs) == Family::BangBang);
  const auto& k = std::get<BangBangKnobs>(r.best_knobs);
  CHECK(k.sigma0 < k.sigma1);
  CHECK(sigma_gap(r) > 10.0);
  CHECK(r.best_cost.total <= r.bangbang.objective + 1e-12);
  // Both switches strictly improve on doing nothing.
  const double idle = cost_infinite(p, {1.0, 6.0}, build_bangbang(p, {0.0, 0.0}), italy_start()).total;
  CHECK(r.best_cost.total < idle);
}

TEST_CASE("property: best cost is non-decreasing in lambda2") {
  const auto p = italy_no_icu();
  double prev = -1.0;
  for (double l2 : {1.0, 3.0, 5.0, 7.0}) {
    const double c = optimize_structured(p, {1.0, l2}, italy_start(), 600.0).best_cost.total;
    CHECK(c >= prev - 1e-9);
    prev = c;
  }
}

TEST_CASE("Delta, lambda2 = 30: second u_max arc") {
  const auto p = delta();
  const CostWeights w{1.0, 30.0};
  const auto r = optimize_structured(p, w, delta_start(), 600.0);
  REQUIRE(family_of(r.best_knobs) == Family::BoundaryArc);
  const auto& k = std::get<BoundaryArcKnobs>(r.best_knobs);
  CHECK(k.delta_post > 1.0);
  CHECK(r.feasible);
  CHECK(r.max_i <= p.i_M + kFeasibilityTolerance);
  const double greedy = cost_infinite(p, w, synthesize_greedy(p, delta_start()), delta_start()).total;
  CHECK(greedy == doctest::Approx(frozen::delta_greedy_cost_l30).epsilon(1e-7));
  CHECK(r.best_cost.total <= greedy + 1e-9);
  CHECK(r.best_cost.total <= r.boundary.objective + 1e-12);
  CHECK(r.switch_times[0] <= r.switch_times[1]);
  CHECK(r.switch_times[1] <= r.switch_times[2]);
  CHECK(r.switch_times[2] < r.switch_times[3]);

  // The reported control evaluates to the reported cost.
  const auto eval = evaluate_infinite(p, w, r.control, delta_start());
  CHECK(eval.cost.total == doctest::Approx(r.best_cost.total).epsilon(1e-6));
  CHECK(eval.max_i <= p.i_M + kFeasibilityTolerance);
}

TEST_CASE("optimizer preconditions") {
  CHECK(code_of([] { optimize_structured(italy(), {1.0, 0.0}, {0.99, 0.01}, 3000.0); }) ==
        ErrorCode::InfeasibleStart);
  CHECK(code_of([] { optimize_structured(italy(), {1.0, 0.0}, italy_start(), 500.0); }) ==
        ErrorCode::PreconditionViolated);
}

TEST_CASE("finite-horizon search respects the window") {
  const auto p = italy_no_icu();
  const auto r = optimize_finite_horizon(p, {1.0, 5.0}, italy_start(), 200.0);
  for (double t : r.switch_times) CHECK(t <= 200.0 + 1e-9);
}

TEST_CASE("gamma diagnostic") {
  const auto p = italy_no_icu();
  CHECK(code_of([&] { gamma_diagnostic(p, {1.0, 5.0}, italy_start(), {400.0, 300.0}); }) ==
        ErrorCode::PreconditionViolated);

  SUBCASE("lambda2 = 0 gives zero gaps") {
    const auto g = gamma_diagnostic(p, {1.0, 0.0}, italy_start(), {300.0, 600.0});
    for (std::size_t k = 0; k < g.horizons.size(); ++k) CHECK(g.gap(k) == 0.0);
  }
  SUBCASE("a horizon that covers the limit control closes the gap") {
    const auto g = gamma_diagnostic(p, {1.0, 5.0}, italy_start(), {600.0});
    CHECK(g.relative_gap(0) < 1e-4);
    CHECK(g.settled[0]);
    CHECK(g.first_settled() == 0);
  }
}

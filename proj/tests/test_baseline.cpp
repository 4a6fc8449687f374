#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "polling_tandem/baseline.hpp"
#include "polling_tandem/ss2.hpp"

using namespace polling_tandem;

namespace {

ModelParams symmetric_model(double mu, double mus) {
  ModelParams m;
  m.lambda = {1.0, 1.0};
  m.mu = {{{mu, mu}, {mu, mu}}};
  m.mu_setup = {{{mus, mus}, {mus, mus}}};
  return m;
}

}  // namespace

TEST_CASE("identical stations yield identical per-station baselines",
          "[baseline]") {
  const auto m = symmetric_model(4.0, 1.0);
  const auto r = solve_simple_decomposition(m);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(r.station1.mean_wait[i] - r.station2.mean_wait[i]) <=
          1e-12);
    CHECK(r.system_wait[i] ==
          Catch::Approx(r.station1.mean_wait[i] + r.station2.mean_wait[i])
              .epsilon(1e-12));
  }
  // The symmetric half-load station solves to 2.50 exactly (within
  // truncation error), so the independent decomposition reports it twice.
  CHECK(r.station2.mean_wait[0] == Catch::Approx(2.5).margin(5e-3));
}

TEST_CASE("baseline ignores upstream service rates", "[baseline]") {
  auto slow_upstream = symmetric_model(4.0, 1.0);
  slow_upstream.mu[0][0] = 2.5;
  slow_upstream.mu[1][0] = 2.5;
  slow_upstream.truncation.queue_cap_ss2_st1 = 24;
  slow_upstream.truncation.queue_cap_ss2_st2 = 24;
  // The slow upstream station stretches the intervisit tail; give the
  // setup-queue PMF enough fixed support since auto-grow is off here.
  slow_upstream.truncation.pmf_cap = 256;
  slow_upstream.truncation.auto_grow = false;

  auto fast_upstream = slow_upstream;
  fast_upstream.mu[0][0] = 10.0;
  fast_upstream.mu[1][0] = 10.0;

  const auto base_slow = solve_simple_decomposition(slow_upstream);
  const auto base_fast = solve_simple_decomposition(fast_upstream);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(base_slow.station2.mean_wait[i] -
                   base_fast.station2.mean_wait[i]) <= 1e-12);
  }

  // The coupled model does react to the upstream change: a slower upstream
  // station smooths the stream feeding station 2.
  const auto prop_slow = solve_ss2(slow_upstream);
  const auto prop_fast = solve_ss2(fast_upstream);
  CHECK(std::abs(prop_slow.mean_wait[0] - prop_fast.mean_wait[0]) > 0.01);
}

TEST_CASE("baseline underestimates the coupled station-2 wait", "[baseline]") {
  auto m = symmetric_model(4.0, 1.0);
  const auto base = solve_simple_decomposition(m);
  const auto prop = solve_ss2(m);
  const double w2_base =
      (base.station2.mean_wait[0] + base.station2.mean_wait[1]) / 2.0;
  const double w2_prop = (prop.mean_wait[0] + prop.mean_wait[1]) / 2.0;
  CHECK(w2_prop - w2_base > 0.05);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "polling_tandem/ss1.hpp"

using namespace polling_tandem;

namespace {

StationParams symmetric_station(double mu, double mus) {
  StationParams p;
  p.lambda = {1.0, 1.0};
  p.mu = {mu, mu};
  p.mu_setup = {mus, mus};
  return p;
}

SolverConfig gs_config() {
  SolverConfig c;
  c.method = SolveMethod::GaussSeidel;
  return c;
}

// Gauss-Seidel driven to a much tighter residual than the production
// default, for tests that compare two solves against each other.
SolverConfig tight_gs_config() {
  SolverConfig c = gs_config();
  c.tol = 0.0;  // converge on the residual, never on the sweep delta
  c.residual_target = 1e-13;
  c.residual_tol = 1e-12;
  return c;
}

}  // namespace

TEST_CASE("state count follows the closed form", "[ss1]") {
  // 4 phases x (cap+1)^2 level pairs, minus the two empty-queue serve
  // columns that are unreachable: 4(c+1)^2 - 2(c+1).
  SolverConfig direct;
  direct.method = SolveMethod::Direct;
  auto r2 = solve_station_fixed_cap(symmetric_station(4.0, 1.0), 2, direct);
  CHECK(r2.num_states == 30);
  auto r64 = solve_station_fixed_cap(symmetric_station(4.0, 1.0), 64, gs_config());
  CHECK(r64.num_states == 16770);
}

TEST_CASE("symmetric station at half load", "[ss1]") {
  const auto r = solve_station_fixed_cap(symmetric_station(4.0, 1.0), 64,
                                         gs_config());
  // Converged reference values for this configuration (stable to the shown
  // digits under further cap growth).
  CHECK(r.mean_wait[0] == Catch::Approx(2.50).margin(0.005));
  CHECK(r.mean_wait[1] == Catch::Approx(2.50).margin(0.005));
  CHECK(std::abs(r.mean_wait[0] - r.mean_wait[1]) <= 1e-8);
  CHECK(std::abs(r.throughput[0] - 1.0) <= 1e-3);
  CHECK(std::abs(r.throughput[1] - 1.0) <= 1e-3);
  // Work conservation: the serve fraction equals the per-product load.
  CHECK(r.serve_fraction[0] == Catch::Approx(0.25).margin(1e-6));
  CHECK(r.residual_inf <= 1e-10);
}

TEST_CASE("symmetric station across the load grid", "[ss1]") {
  struct Row {
    double mu, w;
  };
  // Frozen references from converged solves at cap 128 (identical at cap 64
  // to the digits shown): loads 0.6 and 0.7 and the 0.8 bottleneck.
  const Row rows[] = {{10.0 / 3.0, 3.00}, {20.0 / 7.0, 23.0 / 6.0}, {2.5, 5.50}};
  for (const auto& row : rows) {
    const auto r = solve_station_fixed_cap(symmetric_station(row.mu, 1.0), 128,
                                           gs_config());
    CHECK(r.mean_wait[0] == Catch::Approx(row.w).margin(0.005));
  }
}

TEST_CASE("fast setups shrink waiting toward the M/M/1 range", "[ss1]") {
  const auto r = solve_station_fixed_cap(symmetric_station(4.0, 5.0), 64,
                                         gs_config());
  CHECK(r.mean_wait[0] == Catch::Approx(0.90).margin(0.005));
}

TEST_CASE("product asymmetry: the faster product waits longer", "[ss1]") {
  StationParams p;
  p.lambda = {1.0, 1.0};
  p.mu = {2.5, 6.25};
  p.mu_setup = {1.0, 1.0};
  const auto r = solve_station_fixed_cap(p, 128, gs_config());
  // Frozen converged references.
  CHECK(r.mean_wait[0] == Catch::Approx(2.5853).margin(0.001));
  CHECK(r.mean_wait[1] == Catch::Approx(3.2414).margin(0.001));
  CHECK(r.mean_wait[1] > r.mean_wait[0]);
}

TEST_CASE("relabeling the products relabels the results", "[ss1]") {
  StationParams p;
  p.lambda = {1.0, 1.0};
  p.mu = {2.5, 6.25};
  p.mu_setup = {1.0, 2.0};
  StationParams q = p;
  std::swap(q.mu[0], q.mu[1]);
  std::swap(q.mu_setup[0], q.mu_setup[1]);
  const auto rp = solve_station_fixed_cap(p, 64, tight_gs_config());
  const auto rq = solve_station_fixed_cap(q, 64, tight_gs_config());
  CHECK(rp.mean_wait[0] == Catch::Approx(rq.mean_wait[1]).epsilon(1e-9));
  CHECK(rp.mean_wait[1] == Catch::Approx(rq.mean_wait[0]).epsilon(1e-9));
  CHECK(rp.throughput[0] == Catch::Approx(rq.throughput[1]).epsilon(1e-9));
}

TEST_CASE("time-unit invariance: scaling all rates scales waits inversely",
          "[ss1]") {
  StationParams p;
  p.lambda = {1.0, 1.0};
  p.mu = {4.0, 5.0};
  p.mu_setup = {1.0, 2.0};
  StationParams scaled = p;
  const double c = 3.0;
  for (int i = 0; i < 2; ++i) {
    scaled.lambda[i] *= c;
    scaled.mu[i] *= c;
    scaled.mu_setup[i] *= c;
  }
  const auto r = solve_station_fixed_cap(p, 48, gs_config());
  const auto rs = solve_station_fixed_cap(scaled, 48, gs_config());
  for (int i = 0; i < 2; ++i) {
    CHECK(rs.mean_wait[i] == Catch::Approx(r.mean_wait[i] / c).epsilon(1e-9));
    CHECK(rs.mean_queue[i] == Catch::Approx(r.mean_queue[i]).epsilon(1e-9));
  }
}

TEST_CASE("direct and iterative solves agree", "[ss1]") {
  SolverConfig direct;
  direct.method = SolveMethod::Direct;
  const auto p = symmetric_station(2.5, 1.0);  // high load stresses both
  const auto rd = solve_station_fixed_cap(p, 24, direct);
  const auto rg = solve_station_fixed_cap(p, 24, tight_gs_config());
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(rd.mean_wait[i] - rg.mean_wait[i]) <= 5e-8);
    CHECK(std::abs(rd.mean_queue[i] - rg.mean_queue[i]) <= 5e-8);
  }
}

TEST_CASE("truncation is conservative and auto-growth restores throughput",
          "[ss1]") {
  const auto p = symmetric_station(2.5, 1.0);  // load 0.8 needs deep buffers
  const auto small = solve_station_fixed_cap(p, 8, gs_config());
  const auto medium = solve_station_fixed_cap(p, 16, gs_config());
  const auto large = solve_station_fixed_cap(p, 64, gs_config());
  // Dropped arrivals only remove work: queue estimates grow with the cap.
  CHECK(small.mean_queue[0] <= medium.mean_queue[0] + 1e-12);
  CHECK(medium.mean_queue[0] <= large.mean_queue[0] + 1e-12);
  CHECK(small.throughput[0] < 1.0);

  const auto grown = solve_station(p, 8, gs_config(), true, 12'000'000);
  CHECK(grown.cap_used > 8);
  CHECK(std::abs(grown.throughput[0] - 1.0) <= 1e-3);

  const auto fixed = solve_station(p, 8, gs_config(), false, 12'000'000);
  CHECK(fixed.cap_used == 8);
}

TEST_CASE("state budget violations surface as truncation errors", "[ss1]") {
  const auto p = symmetric_station(4.0, 1.0);
  CHECK_THROWS_AS(solve_station(p, 64, gs_config(), false, 1000),
                  TruncationError);
}

TEST_CASE("full-model entry point honors the station-1 slice", "[ss1]") {
  ModelParams m;
  m.mu = {{{4.0, 99.0}, {4.0, 77.0}}};  // station-2 rates must not matter
  m.mu_setup = {{{1.0, 88.0}, {1.0, 66.0}}};
  m.truncation.queue_cap_ss1 = 32;
  const auto r = solve_ss1(m);
  CHECK(r.mean_wait[0] == Catch::Approx(2.50).margin(0.01));
  CHECK(r.cap_used >= 32);
}

#include <catch2/catch_amalgamated.hpp>

#include "polling_tandem/params.hpp"

using namespace polling_tandem;

TEST_CASE("default parameters are valid and symmetric", "[params]") {
  ModelParams p;
  const auto warnings = validate(p);
  CHECK(warnings.empty());
  CHECK(p.rho_ij(0, 0) == Catch::Approx(0.25));
  CHECK(p.rho_station(0) == Catch::Approx(0.5));
  CHECK(p.rho_station(1) == Catch::Approx(0.5));
}

TEST_CASE("validation rejects nonpositive rates", "[params]") {
  ModelParams p;
  p.lambda[0] = 0.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = ModelParams{};
  p.mu[1][0] = -1.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = ModelParams{};
  p.mu_setup[0][1] = 0.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("validation rejects unstable loads and warns near saturation",
          "[params]") {
  ModelParams p;
  p.mu = {{{2.0, 4.0}, {2.0, 4.0}}};  // station 1 at rho = 1
  CHECK_THROWS_AS(validate(p), std::invalid_argument);

  p = ModelParams{};
  p.mu = {{{2.1, 4.0}, {2.1, 4.0}}};  // station 1 at rho ~ 0.952
  const auto warnings = validate(p);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("station 1") != std::string::npos);
}

TEST_CASE("truncation config bounds", "[params]") {
  TruncationConfig t;
  t.queue_cap_ss1 = 1;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = TruncationConfig{};
  t.pmf_cap = 0;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t = TruncationConfig{};
  t.max_states = 4;
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("solver method names round-trip", "[params]") {
  for (auto m : {SolveMethod::Auto, SolveMethod::Direct,
                 SolveMethod::GaussSeidel, SolveMethod::Power})
    CHECK(solve_method_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(solve_method_from_string("newton"), std::invalid_argument);
}

TEST_CASE("json round-trip preserves every field", "[params]") {
  ModelParams p;
  p.lambda = {1.5, 0.5};
  p.mu = {{{4.0, 3.0}, {6.0, 5.0}}};
  p.mu_setup = {{{1.0, 2.0}, {0.5, 0.25}}};
  p.truncation.queue_cap_ss1 = 32;
  p.truncation.queue_cap_ss2_st1 = 48;
  p.truncation.queue_cap_ss2_st2 = 40;
  p.truncation.pmf_cap = 96;
  p.truncation.auto_grow = false;
  p.truncation.max_states = 1000;
  p.solver.method = SolveMethod::Power;
  p.solver.tol = 1e-10;
  p.solver.residual_target = 1e-9;
  p.solver.max_sweeps = 123;
  p.solver.relaxation = 1.2;
  p.solver.variance_convention = VarianceConvention::SquaredMean;

  const json j = p;
  const ModelParams q = j.get<ModelParams>();
  CHECK(q.lambda == p.lambda);
  CHECK(q.mu == p.mu);
  CHECK(q.mu_setup == p.mu_setup);
  CHECK(q.truncation.queue_cap_ss1 == 32);
  CHECK(q.truncation.queue_cap_ss2_st1 == 48);
  CHECK(q.truncation.queue_cap_ss2_st2 == 40);
  CHECK(q.truncation.pmf_cap == 96);
  CHECK(q.truncation.auto_grow == false);
  CHECK(q.truncation.max_states == 1000);
  CHECK(q.solver.method == SolveMethod::Power);
  CHECK(q.solver.tol == 1e-10);
  CHECK(q.solver.residual_target == 1e-9);
  CHECK(q.solver.max_sweeps == 123);
  CHECK(q.solver.relaxation == 1.2);
  CHECK(q.solver.variance_convention == VarianceConvention::SquaredMean);
}

TEST_CASE("json with absent keys keeps defaults", "[params]") {
  const json j = json::parse(R"({"lambda": [2.0, 2.0]})");
  const ModelParams p = j.get<ModelParams>();
  CHECK(p.lambda[0] == 2.0);
  CHECK(p.mu[0][0] == 4.0);
  CHECK(p.truncation.queue_cap_ss1 == 64);
  CHECK(p.solver.method == SolveMethod::Auto);
}

TEST_CASE("json rejects malformed arrays", "[params]") {
  CHECK_THROWS_AS(json::parse(R"({"lambda": [1.0]})").get<ModelParams>(),
                  std::invalid_argument);
  CHECK_THROWS_AS(json::parse(R"({"mu": [[1,2],[3]]})").get<ModelParams>(),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      json::parse(R"({"solver": {"method": "bogus"}})").get<ModelParams>(),
      std::invalid_argument);
  CHECK_THROWS_AS(json::parse(R"({"solver": {"variance_convention": "x"}})")
                      .get<ModelParams>(),
                  std::invalid_argument);
}

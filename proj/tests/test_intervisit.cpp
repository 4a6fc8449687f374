#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "polling_tandem/intervisit.hpp"

using namespace polling_tandem;

namespace {

StationParams symmetric_station(double mu, double mus) {
  StationParams p;
  p.lambda = {1.0, 1.0};
  p.mu = {mu, mu};
  p.mu_setup = {mus, mus};
  return p;
}

// Independent check of the negative-binomial mass: integrate the Poisson
// mass over the Gamma density by composite Simpson quadrature.
double nb_by_quadrature(double lambda, double alpha, double beta, int l) {
  const double mean = alpha * beta;
  const double sd = std::sqrt(alpha) * beta;
  const double upper = mean + 40.0 * sd;
  const int n = 500000;  // even; the t^(alpha-1) kink at 0 limits the order
  const double h = upper / n;
  auto integrand = [&](double t) -> double {
    if (t <= 0.0) return 0.0;
    const double log_gamma_pdf = (alpha - 1.0) * std::log(t) - t / beta -
                                 std::lgamma(alpha) - alpha * std::log(beta);
    const double log_pois = l * std::log(lambda * t) - lambda * t -
                            std::lgamma(static_cast<double>(l) + 1.0);
    return std::exp(log_gamma_pdf + log_pois);
  };
  double sum = integrand(0.0) + integrand(upper);
  for (int k = 1; k < n; ++k)
    sum += integrand(k * h) * ((k % 2) ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("symmetric fit matches the hand-derived moments", "[intervisit]") {
  const auto m = fit_intervisit(symmetric_station(4.0, 1.0));
  CHECK(m.mean_cycle[0] == Catch::Approx(4.0).epsilon(1e-12));
  CHECK(m.mean_visit[0] == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(m.mean_intervisit[0] == Catch::Approx(3.0).epsilon(1e-12));
  CHECK(m.var_intervisit[0] == Catch::Approx(4.0).epsilon(1e-12));
  CHECK(m.gamma_shape[0] == Catch::Approx(2.25).epsilon(1e-12));
  CHECK(m.gamma_scale[0] == Catch::Approx(4.0 / 3.0).epsilon(1e-12));
  // Full product symmetry.
  CHECK(m.var_intervisit[1] == Catch::Approx(m.var_intervisit[0]).epsilon(1e-12));
}

TEST_CASE("asymmetric setups give distinct per-product variances",
          "[intervisit]") {
  StationParams p;
  p.lambda = {1.0, 1.0};
  p.mu = {4.0, 4.0};
  p.mu_setup = {1.0, 5.0};
  const auto m = fit_intervisit(p);
  // Hand-derived: E[C] = 1.2 / 0.5; variances via the cycle decomposition.
  CHECK(m.mean_cycle[0] == Catch::Approx(2.4).epsilon(1e-12));
  CHECK(m.var_intervisit[0] == Catch::Approx(2.448).epsilon(1e-12));
  CHECK(m.var_intervisit[1] == Catch::Approx(1.872).epsilon(1e-12));
}

TEST_CASE("variance convention switch lowers the spread", "[intervisit]") {
  const auto p = symmetric_station(4.0, 1.0);
  const auto second = fit_intervisit(p, VarianceConvention::SecondMoment);
  const auto squared = fit_intervisit(p, VarianceConvention::SquaredMean);
  CHECK(second.var_intervisit[0] == Catch::Approx(4.0).epsilon(1e-12));
  CHECK(squared.var_intervisit[0] == Catch::Approx(3.5).epsilon(1e-12));
  // Means are exact and unaffected by the convention.
  CHECK(squared.mean_intervisit[0] ==
        Catch::Approx(second.mean_intervisit[0]).epsilon(1e-12));
}

TEST_CASE("fit rejects overloaded stations", "[intervisit]") {
  StationParams p;
  p.lambda = {1.0, 1.0};
  p.mu = {2.0, 2.0};  // rho = 1
  p.mu_setup = {1.0, 1.0};
  CHECK_THROWS_AS(fit_intervisit(p), std::invalid_argument);
}

TEST_CASE("queue pmf head terms match independent quadrature", "[intervisit]") {
  const auto m = fit_intervisit(symmetric_station(4.0, 1.0));
  const double alpha = m.gamma_shape[0], beta = m.gamma_scale[0];
  const auto pmf = nb_queue_pmf(1.0, alpha, beta, 32);
  for (int l : {0, 1, 2, 5, 10, 20}) {
    const double q = nb_by_quadrature(1.0, alpha, beta, l);
    CHECK(std::abs(pmf.p[static_cast<std::size_t>(l)] - q) <= 1e-10);
  }
  CHECK(pmf.p[0] == Catch::Approx(std::exp(-alpha * std::log1p(beta))).epsilon(1e-14));
}

TEST_CASE("queue pmf reproduces the analytic mean and variance",
          "[intervisit]") {
  const auto p = symmetric_station(4.0, 1.0);
  const auto model = fit_setup_queue_model(p, 64, true);
  for (int i = 0; i < 2; ++i) {
    const auto& pmf = model.pmf[i].p;
    double mass = 0.0, mean = 0.0, m2 = 0.0;
    for (std::size_t l = 0; l < pmf.size(); ++l) {
      mass += pmf[l];
      mean += static_cast<double>(l) * pmf[l];
      m2 += static_cast<double>(l) * static_cast<double>(l) * pmf[l];
    }
    const double lam = p.lambda[i];
    const double want_mean = lam * model.intervisit.mean_intervisit[i];
    const double want_var = want_mean + lam * lam * model.intervisit.var_intervisit[i];
    CHECK(std::abs(mass - 1.0) <= 1e-6);
    CHECK(std::abs(mean - want_mean) <= 1e-6);
    CHECK(std::abs((m2 - mean * mean) - want_var) <= 1e-6);
  }
}

TEST_CASE("pmf support doubles until the tail target is met", "[intervisit]") {
  // Load 0.9 stretches the intervisit tail far beyond 8 support points.
  const auto p = symmetric_station(20.0 / 9.0, 1.0);
  const auto grown = fit_setup_queue_model(p, 8, true);
  CHECK(grown.kmax_used > 8);
  CHECK(grown.pmf[0].tail < 1e-8);
  CHECK_THROWS_AS(fit_setup_queue_model(p, 8, false), TruncationError);
}

TEST_CASE("pmf parameter validation", "[intervisit]") {
  CHECK_THROWS_AS(nb_queue_pmf(0.0, 1.0, 1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(nb_queue_pmf(1.0, -1.0, 1.0, 8), std::invalid_argument);
  CHECK_THROWS_AS(nb_queue_pmf(1.0, 1.0, 1.0, -1), std::invalid_argument);
}

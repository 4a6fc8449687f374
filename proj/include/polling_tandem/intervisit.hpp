#pragma once

// Intervisit-time model for station 1 and the resulting queue-length
// distribution seen by station 2 at the instant a setup for product i
// completes at station 1.
//
// For each product i at station 1, the time between the server leaving
// product i and returning to start its setup again (the intervisit time I_i)
// is approximated by a Gamma distribution matched to the exact mean and an
// approximate variance derived from the cycle-time decomposition of the
// exhaustive two-product polling station. The number of product-i arrivals
// during I_i (a Poisson process sampled over a Gamma-distributed interval)
// is then negative-binomial, which yields the queue-length probability mass
// function p_i(l) used when station 1 completes a setup in the reduced
// station-2 chain.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "polling_tandem/params.hpp"
#include "polling_tandem/ss1.hpp"

namespace polling_tandem {

struct IntervisitModel {
  // All quantities are per product (index = product).
  std::array<double, 2> mean_cycle{0.0, 0.0};   // E[C], same for both products
  std::array<double, 2> mean_visit{0.0, 0.0};   // E[V_i]
  std::array<double, 2> mean_intervisit{0.0, 0.0};
  std::array<double, 2> var_intervisit{0.0, 0.0};
  std::array<double, 2> gamma_shape{0.0, 0.0};  // alpha_i
  std::array<double, 2> gamma_scale{0.0, 0.0};  // beta_i
};

// Mean and variance of the intervisit time of each product at a two-product
// exhaustive polling station with exponential switch-over times.
//
// Means are exact: E[C] = E[H] / (1 - rho) with E[H] the total mean setup
// per cycle and rho the station utilisation; E[V_i] = rho_i E[C];
// E[I_i] = E[C] - E[V_i].
//
// The variance treats the two per-product busy periods and setups in a cycle
// as independent: the busy period initiated by the work arriving during the
// complementary intervisit interval has squared-coefficient contributions
// from (a) the Poisson count over the cycle and (b) the service-time spread,
// closed under the cycle fixed point. `convention` selects the second moment
// of the exponential service time (2/mu^2) or its squared mean (1/mu^2) in
// contribution (b); the difference is immaterial in practice but both are
// provided for sensitivity checks.
inline IntervisitModel fit_intervisit(const StationParams& p,
                                      VarianceConvention convention =
                                          VarianceConvention::SecondMoment) {
  const double rho0 = p.lambda[0] / p.mu[0];
  const double rho1 = p.lambda[1] / p.mu[1];
  const double rho = rho0 + rho1;
  if (rho >= 1.0)
    throw std::invalid_argument("station utilisation must be below one");
  const std::array<double, 2> rho_i{rho0, rho1};

  const double mean_setup_total = 1.0 / p.mu_setup[0] + 1.0 / p.mu_setup[1];
  const double mean_cycle = mean_setup_total / (1.0 - rho);

  std::array<double, 2> t2{};  // second-moment proxy of the service time
  for (int i = 0; i < 2; ++i)
    t2[i] = (convention == VarianceConvention::SecondMoment)
                ? 2.0 / (p.mu[i] * p.mu[i])
                : 1.0 / (p.mu[i] * p.mu[i]);
  // Exponential setup durations: variance = mean^2.
  const std::array<double, 2> var_setup{
      1.0 / (p.mu_setup[0] * p.mu_setup[0]),
      1.0 / (p.mu_setup[1] * p.mu_setup[1])};

  IntervisitModel m;
  const double denom =
      (1.0 - rho0 - rho1) * (1.0 - rho0 - rho1 + 2.0 * rho0 * rho1);
  if (!(denom > 0.0))
    throw std::invalid_argument("intervisit variance denominator vanished");
  for (int i = 0; i < 2; ++i) {
    const int o = 1 - i;  // the other product
    m.mean_cycle[i] = mean_cycle;
    m.mean_visit[i] = rho_i[i] * mean_cycle;
    m.mean_intervisit[i] = mean_cycle - m.mean_visit[i];

    const double num =
        rho_i[o] * rho_i[o] *
            (p.lambda[i] * t2[i] * mean_cycle + var_setup[o]) +
        (1.0 - rho_i[i]) * (1.0 - rho_i[i]) *
            (p.lambda[o] * t2[o] * mean_cycle + var_setup[i]);
    m.var_intervisit[i] = var_setup[o] + num / denom;

    if (!(m.var_intervisit[i] > 0.0) || !(m.mean_intervisit[i] > 0.0))
      throw std::invalid_argument("degenerate intervisit fit");
    m.gamma_shape[i] =
        m.mean_intervisit[i] * m.mean_intervisit[i] / m.var_intervisit[i];
    m.gamma_scale[i] = m.var_intervisit[i] / m.mean_intervisit[i];
  }
  return m;
}

// Probability mass function of the number of Poisson(lambda) arrivals over a
// Gamma(shape alpha, scale beta) interval: negative binomial with
//   p(0)     = (1 + beta lambda)^(-alpha)
//   p(l+1)   = p(l) * (alpha + l) / (l + 1) * beta lambda / (1 + beta lambda)
// computed by the stable log/ratio recurrence. Returns p(0..kmax) and the
// mass beyond kmax.
struct QueuePmf {
  std::vector<double> p;  // p[l], l = 0..kmax
  double tail = 0.0;      // P(L > kmax) before any renormalisation
};

inline QueuePmf nb_queue_pmf(double lambda, double alpha, double beta,
                             std::int32_t kmax) {
  if (!(lambda > 0.0) || !(alpha > 0.0) || !(beta > 0.0) || kmax < 0)
    throw std::invalid_argument("nb_queue_pmf: invalid parameters");
  QueuePmf out;
  out.p.resize(static_cast<std::size_t>(kmax) + 1);
  const double bl = beta * lambda;
  const double ratio = bl / (1.0 + bl);
  out.p[0] = std::exp(-alpha * std::log1p(bl));
  double cum = out.p[0];
  for (std::int32_t l = 0; l < kmax; ++l) {
    out.p[l + 1] = out.p[l] * (alpha + static_cast<double>(l)) /
                   (static_cast<double>(l) + 1.0) * ratio;
    cum += out.p[l + 1];
  }
  out.tail = std::max(0.0, 1.0 - cum);
  return out;
}

// Per-product queue PMFs at setup completion, extended until the truncated
// tail is below `tail_tol` (the cutoff doubles as needed, up to `kmax_limit`).
struct SetupQueueModel {
  IntervisitModel intervisit;
  std::array<QueuePmf, 2> pmf;
  std::int32_t kmax_used = 0;
};

inline SetupQueueModel fit_setup_queue_model(
    const StationParams& p, std::int32_t kmax, bool auto_grow,
    VarianceConvention convention = VarianceConvention::SecondMoment,
    double tail_tol = 1e-8, std::int32_t kmax_limit = 1 << 16) {
  SetupQueueModel m;
  m.intervisit = fit_intervisit(p, convention);
  std::int32_t k = kmax;
  for (;;) {
    double worst_tail = 0.0;
    for (int i = 0; i < 2; ++i) {
      m.pmf[i] = nb_queue_pmf(p.lambda[i], m.intervisit.gamma_shape[i],
                              m.intervisit.gamma_scale[i], k);
      worst_tail = std::max(worst_tail, m.pmf[i].tail);
    }
    m.kmax_used = k;
    if (worst_tail <= tail_tol) return m;
    if (!auto_grow)
      throw TruncationError(
          "queue PMF cap too small: truncated tail mass " +
          std::to_string(worst_tail) + " at K = " + std::to_string(k));
    if (k >= kmax_limit)
      throw TruncationError("queue PMF cap limit reached without tail target");
    k *= 2;
  }
}

}  // namespace polling_tandem

#pragma once

// Exact CTMC for a single polling station serving two products exhaustively
// with exponential setups (switch-over times) between products. Used both for
// station 1 of the tandem and, in the baseline method, for station 2 fed by
// independent Poisson streams.
//
// State: (l0, l1, phase) with queue lengths l_i in [0, cap] and phase one of
//   Setup0, Setup1  - server is switching towards product 0 / 1,
//   Serve0, Serve1  - server is serving product 0 / 1 (queue nonempty).
// Transitions:
//   arrival of product i at rate lambda_i: l_i += 1 (dropped at the cap);
//   setup completion in Setup_i at rate mu_setup_i:
//       -> Serve_i if l_i > 0, else -> Setup_{1-i} (immediate switch);
//   service completion in Serve_i at rate mu_i:
//       l_i -= 1, then -> Setup_{1-i} if l_i hit 0 (exhaustive), else stay.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "polling_tandem/ctmc.hpp"
#include "polling_tandem/params.hpp"

namespace polling_tandem {

enum class Phase : std::uint8_t { Setup0 = 0, Setup1 = 1, Serve0 = 2, Serve1 = 3 };

inline bool is_serve(Phase p) { return p == Phase::Serve0 || p == Phase::Serve1; }
inline int phase_product(Phase p) { return (static_cast<int>(p) & 1); }

// Parameters of one station in isolation.
struct StationParams {
  std::array<double, 2> lambda{1.0, 1.0};
  std::array<double, 2> mu{4.0, 4.0};
  std::array<double, 2> mu_setup{1.0, 1.0};
};

struct Ss1State {
  std::int32_t l0 = 0;
  std::int32_t l1 = 0;
  Phase phase = Phase::Setup0;
};

inline std::uint64_t pack_ss1(const Ss1State& s) {
  return (static_cast<std::uint64_t>(s.l0) << 34) |
         (static_cast<std::uint64_t>(s.l1) << 2) |
         static_cast<std::uint64_t>(s.phase);
}

// Emits all outgoing transitions of `s` under caps `cap` per queue.
// Arrivals that would exceed the cap are dropped (no transition), which
// keeps the chain conservative; the throughput check below quantifies the
// resulting loss and drives cap growth.
template <class Emit>
void ss1_successors(const StationParams& p, std::int32_t cap, const Ss1State& s,
                    Emit&& emit) {
  const std::array<std::int32_t, 2> l{s.l0, s.l1};
  for (int i = 0; i < 2; ++i) {
    if (l[i] < cap) {
      Ss1State t = s;
      (i == 0 ? t.l0 : t.l1) += 1;
      emit(t, p.lambda[i]);
    }
  }
  if (is_serve(s.phase)) {
    const int i = phase_product(s.phase);
    Ss1State t = s;
    auto& li = (i == 0 ? t.l0 : t.l1);
    li -= 1;
    if (li == 0) t.phase = (i == 0 ? Phase::Setup1 : Phase::Setup0);
    emit(t, p.mu[i]);
  } else {
    const int i = phase_product(s.phase);
    Ss1State t = s;
    if (l[i] > 0)
      t.phase = (i == 0 ? Phase::Serve0 : Phase::Serve1);
    else
      t.phase = (i == 0 ? Phase::Setup1 : Phase::Setup0);
    emit(t, p.mu_setup[i]);
  }
}

struct StationResult {
  std::array<double, 2> throughput{0.0, 0.0};
  std::array<double, 2> mean_queue{0.0, 0.0};
  std::array<double, 2> mean_wait{0.0, 0.0};  // sojourn time, L_i / TH_i
  std::array<double, 2> serve_fraction{0.0, 0.0};
  double residual_inf = 0.0;
  std::int64_t num_states = 0;
  std::int32_t cap_used = 0;
  SolveMethod method_used = SolveMethod::Direct;
  std::int64_t iterations = 0;
};

namespace detail {

inline double kahan_sum(const std::vector<double>& term) {
  double sum = 0.0, c = 0.0;
  for (double v : term) {
    const double y = v - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace detail

// Builds and solves the station chain at a fixed cap. Throws on solver
// failure; does not auto-grow.
inline StationResult solve_station_fixed_cap(const StationParams& p,
                                             std::int32_t cap,
                                             const SolverConfig& solver,
                                             const std::vector<double>* warm =
                                                 nullptr,
                                             Solution* solution_out = nullptr) {
  const auto pack = [](const Ss1State& s) { return pack_ss1(s); };
  const auto succ = [&](const Ss1State& s, auto&& emit) {
    ss1_successors(p, cap, s, emit);
  };
  const std::vector<Ss1State> seeds{Ss1State{0, 0, Phase::Setup0}};
  const auto space = enumerate_states<Ss1State>(
      seeds, pack, succ, static_cast<std::int64_t>(4) * (cap + 1) * (cap + 1));
  const auto gen = build_generator(space, pack, succ);
  const Solution sol = solve_stationary(gen, solver, warm);

  StationResult r;
  r.num_states = space.size();
  r.cap_used = cap;
  r.residual_inf = sol.residual_inf;
  r.method_used = sol.method_used;
  r.iterations = sol.iterations;

  std::vector<double> terms;
  for (int i = 0; i < 2; ++i) {
    double serve = 0.0;
    terms.clear();
    terms.reserve(space.states.size());
    for (std::int64_t k = 0; k < space.size(); ++k) {
      const auto& s = space.states[k];
      const double pi = sol.pi[k];
      if (is_serve(s.phase) && phase_product(s.phase) == i) serve += pi;
      terms.push_back(pi * static_cast<double>(i == 0 ? s.l0 : s.l1));
    }
    r.serve_fraction[i] = serve;
    r.throughput[i] = p.mu[i] * serve;
    r.mean_queue[i] = detail::kahan_sum(terms);
    r.mean_wait[i] =
        r.throughput[i] > 0.0 ? r.mean_queue[i] / r.throughput[i] : 0.0;
  }
  if (solution_out) *solution_out = sol;
  return r;
}

// Solves the station chain, doubling the cap while the throughput deficit
// relative to the offered load exceeds solver.throughput_rel_tol (truncation
// starves the chain of work it should be carrying).
inline StationResult solve_station(const StationParams& p, std::int32_t cap,
                                   const SolverConfig& solver, bool auto_grow,
                                   std::int64_t max_states) {
  std::int32_t c = cap;
  for (;;) {
    const std::int64_t n = static_cast<std::int64_t>(4) * (c + 1) * (c + 1);
    if (n > max_states)
      throw TruncationError(
          "station chain would exceed max_states at cap " + std::to_string(c));
    StationResult r = solve_station_fixed_cap(p, c, solver);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i)
      if (p.lambda[i] > 0.0)
        worst = std::max(worst,
                         std::abs(r.throughput[i] - p.lambda[i]) / p.lambda[i]);
    if (!auto_grow || worst <= solver.throughput_rel_tol) return r;
    c *= 2;
  }
}

// Station 1 of the tandem, taken from the full model parameters.
inline StationParams station1_params(const ModelParams& m) {
  StationParams p;
  p.lambda = m.lambda;
  p.mu = {m.mu[0][0], m.mu[1][0]};
  p.mu_setup = {m.mu_setup[0][0], m.mu_setup[1][0]};
  return p;
}

inline StationResult solve_ss1(const ModelParams& m) {
  return solve_station(station1_params(m), m.truncation.queue_cap_ss1,
                       m.solver, m.truncation.auto_grow,
                       m.truncation.max_states);
}

}  // namespace polling_tandem

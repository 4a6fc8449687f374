#pragma once

// Reduced CTMC for station 2 of the tandem.
//
// Tracking the full joint state of both stations is intractable, so the
// station-1 side is partially collapsed: while station 1 is setting up for
// product i, its queue lengths are not represented at all; when the setup
// completes, the number of product-i units found waiting is drawn from the
// negative-binomial queue model p_i(l) (see intervisit.hpp). If l = 0 the
// server switches straight to the other product's setup; otherwise station 1
// starts an exhaustive service period with l units, during which the served
// queue is tracked exactly (product-i arrivals join it) and every service
// completion hands one unit to the product's station-2 queue.
//
// State: (phase1, l11, l12, l22, phase2)
//   phase1 - station-1 phase (Setup_i or Serve_i);
//   l11    - remaining station-1 queue of the product in service (Serve only);
//   l12/l22- station-2 queue of product 0 / 1;
//   phase2 - station-2 phase, with the same polling semantics as station 1.
// Station-2 transitions mirror the single-station chain; station-1 service
// completions increment the corresponding station-2 queue (saturating at the
// cap so that probability mass is conserved).

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "polling_tandem/ctmc.hpp"
#include "polling_tandem/intervisit.hpp"
#include "polling_tandem/params.hpp"
#include "polling_tandem/ss1.hpp"

namespace polling_tandem {

struct Ss2State {
  Phase phase1 = Phase::Setup0;
  std::int32_t l11 = 0;  // only nonzero while phase1 is Serve_i
  std::int32_t l12 = 0;
  std::int32_t l22 = 0;
  Phase phase2 = Phase::Setup0;
};

inline std::uint64_t pack_ss2(const Ss2State& s) {
  return (static_cast<std::uint64_t>(s.phase1) << 62) |
         (static_cast<std::uint64_t>(s.l11) << 42) |
         (static_cast<std::uint64_t>(s.l12) << 22) |
         (static_cast<std::uint64_t>(s.l22) << 2) |
         static_cast<std::uint64_t>(s.phase2);
}

namespace detail {

struct Ss2Dynamics {
  std::array<double, 2> lambda;
  std::array<double, 2> mu1, mu2;        // service rates at stations 1, 2
  std::array<double, 2> mu_setup1, mu_setup2;
  std::int32_t c1 = 0, c2 = 0;
  // Setup-completion emission: emission[i][l] is the probability that the
  // completing setup for product i finds l waiting units, renormalised over
  // l = 0..min(kmax, c1).
  std::array<std::vector<double>, 2> emission;
};

template <class Emit>
void ss2_station2_events(const Ss2Dynamics& d, const Ss2State& s, Emit&& emit) {
  const std::array<std::int32_t, 2> l2{s.l12, s.l22};
  if (is_serve(s.phase2)) {
    const int i = phase_product(s.phase2);
    Ss2State t = s;
    auto& li = (i == 0 ? t.l12 : t.l22);
    li -= 1;
    if (li == 0) t.phase2 = (i == 0 ? Phase::Setup1 : Phase::Setup0);
    emit(t, d.mu2[i]);
  } else {
    const int i = phase_product(s.phase2);
    Ss2State t = s;
    if (l2[i] > 0)
      t.phase2 = (i == 0 ? Phase::Serve0 : Phase::Serve1);
    else
      t.phase2 = (i == 0 ? Phase::Setup1 : Phase::Setup0);
    emit(t, d.mu_setup2[i]);
  }
}

template <class Emit>
void ss2_successors(const Ss2Dynamics& d, const Ss2State& s, Emit&& emit) {
  if (is_serve(s.phase1)) {
    const int i = phase_product(s.phase1);
    // Arrival of the product currently in service at station 1; the other
    // product's station-1 queue is collapsed and accrues inside p_i(l).
    if (s.l11 < d.c1) {
      Ss2State t = s;
      t.l11 += 1;
      emit(t, d.lambda[i]);
    }
    // Service completion: one unit moves to the product's station-2 queue.
    {
      Ss2State t = s;
      t.l11 -= 1;
      auto& li2 = (i == 0 ? t.l12 : t.l22);
      li2 = std::min(li2 + 1, d.c2);
      if (t.l11 == 0) t.phase1 = (i == 0 ? Phase::Setup1 : Phase::Setup0);
      emit(t, d.mu1[i]);
    }
  } else {
    const int i = phase_product(s.phase1);
    const auto& em = d.emission[i];
    // Setup completion, splitting over the queue found at that instant.
    for (std::int32_t l = 0; l < static_cast<std::int32_t>(em.size()); ++l) {
      if (em[l] <= 0.0) continue;
      Ss2State t = s;
      if (l == 0) {
        t.phase1 = (i == 0 ? Phase::Setup1 : Phase::Setup0);
      } else {
        t.phase1 = (i == 0 ? Phase::Serve0 : Phase::Serve1);
        t.l11 = l;
      }
      emit(t, em[l] * d.mu_setup1[i]);
    }
  }
  ss2_station2_events(d, s, emit);
}

inline Ss2Dynamics make_dynamics(const ModelParams& m,
                                 const SetupQueueModel& queue_model,
                                 std::int32_t c1, std::int32_t c2) {
  Ss2Dynamics d;
  d.lambda = m.lambda;
  d.mu1 = {m.mu[0][0], m.mu[1][0]};
  d.mu2 = {m.mu[0][1], m.mu[1][1]};
  d.mu_setup1 = {m.mu_setup[0][0], m.mu_setup[1][0]};
  d.mu_setup2 = {m.mu_setup[0][1], m.mu_setup[1][1]};
  d.c1 = c1;
  d.c2 = c2;
  for (int i = 0; i < 2; ++i) {
    const auto& pmf = queue_model.pmf[i].p;
    const std::size_t take = static_cast<std::size_t>(
        std::min<std::int64_t>(static_cast<std::int64_t>(pmf.size()) - 1, c1));
    std::vector<double> em(pmf.begin(), pmf.begin() + take + 1);
    double sum = 0.0;
    for (double v : em) sum += v;
    for (double& v : em) v /= sum;
    d.emission[i] = std::move(em);
  }
  return d;
}

}  // namespace detail

struct Ss2Result {
  std::array<double, 2> throughput{0.0, 0.0};   // station-2 departures
  std::array<double, 2> mean_queue{0.0, 0.0};   // station-2 queues
  std::array<double, 2> mean_wait{0.0, 0.0};    // L_i2 / TH_i2
  std::array<double, 2> station1_throughput{0.0, 0.0};  // within the reduction
  double residual_inf = 0.0;
  std::int64_t num_states = 0;
  std::int32_t cap_station1_used = 0;
  std::int32_t cap_station2_used = 0;
  std::int32_t pmf_kmax_used = 0;
  SolveMethod method_used = SolveMethod::GaussSeidel;
  std::int64_t iterations = 0;
};

namespace detail {

struct Ss2Solve {
  StateSpace<Ss2State> space;
  Solution sol;
};

inline Ss2Solve solve_ss2_fixed(const Ss2Dynamics& d, const SolverConfig& cfg,
                                std::int64_t max_states,
                                const Ss2Solve* coarse) {
  const auto pack = [](const Ss2State& s) { return pack_ss2(s); };
  const auto succ = [&](const Ss2State& s, auto&& emit) {
    detail::ss2_successors(d, s, emit);
  };
  Ss2Solve out;
  out.space = enumerate_states<Ss2State>({Ss2State{}}, pack, succ, max_states);
  const auto gen = build_generator(out.space, pack, succ);

  std::vector<double> warm;
  if (coarse && !coarse->sol.pi.empty()) {
    warm.assign(out.space.size(), 0.0);
    for (std::int64_t k = 0; k < coarse->space.size(); ++k) {
      const auto id = out.space.id_of(pack(coarse->space.states[k]));
      if (id >= 0) warm[id] = coarse->sol.pi[k];
    }
  }
  out.sol = solve_stationary(gen, cfg, warm.empty() ? nullptr : &warm);
  return out;
}

inline Ss2Result measure_ss2(const Ss2Dynamics& d, const Ss2Solve& s) {
  Ss2Result r;
  r.num_states = s.space.size();
  r.residual_inf = s.sol.residual_inf;
  r.method_used = s.sol.method_used;
  r.iterations = s.sol.iterations;
  r.cap_station1_used = d.c1;
  r.cap_station2_used = d.c2;

  std::array<std::vector<double>, 2> lterms;
  for (auto& v : lterms) v.reserve(s.space.states.size());
  std::array<double, 2> serve2{0.0, 0.0};
  std::array<double, 2> serve1{0.0, 0.0};
  for (std::int64_t k = 0; k < s.space.size(); ++k) {
    const auto& st = s.space.states[k];
    const double pi = s.sol.pi[k];
    if (is_serve(st.phase2)) serve2[phase_product(st.phase2)] += pi;
    if (is_serve(st.phase1)) serve1[phase_product(st.phase1)] += pi;
    lterms[0].push_back(pi * static_cast<double>(st.l12));
    lterms[1].push_back(pi * static_cast<double>(st.l22));
  }
  for (int i = 0; i < 2; ++i) {
    r.throughput[i] = d.mu2[i] * serve2[i];
    r.station1_throughput[i] = d.mu1[i] * serve1[i];
    r.mean_queue[i] = kahan_sum(lterms[i]);
    r.mean_wait[i] =
        r.throughput[i] > 0.0 ? r.mean_queue[i] / r.throughput[i] : 0.0;
  }
  return r;
}

}  // namespace detail

// Solves the reduced station-2 chain. Caps are taken from the model's
// truncation config; with auto_grow, both station caps double together while
// the station-2 throughput deficit exceeds solver.throughput_rel_tol. Large
// instances are warm-started through a ladder of coarser caps so that the
// Gauss-Seidel solve at the final cap starts near the answer.
inline Ss2Result solve_ss2(const ModelParams& m) {
  const StationParams st1 = station1_params(m);
  const SetupQueueModel queue_model = fit_setup_queue_model(
      st1, m.truncation.pmf_cap, m.truncation.auto_grow,
      m.solver.variance_convention);

  std::int32_t c1 = m.truncation.queue_cap_ss2_st1;
  std::int32_t c2 = m.truncation.queue_cap_ss2_st2;
  for (;;) {
    // Continuation ladder: quarter, half, then full caps (deduplicated).
    std::vector<std::pair<std::int32_t, std::int32_t>> ladder;
    const bool big = static_cast<std::int64_t>(c1) * c2 > 1024;
    if (big) {
      ladder.push_back({std::max(8, c1 / 4), std::max(8, c2 / 4)});
      ladder.push_back({std::max(16, c1 / 2), std::max(16, c2 / 2)});
    }
    ladder.push_back({c1, c2});
    ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());

    detail::Ss2Solve prev, cur;
    detail::Ss2Dynamics dyn;
    for (std::size_t step = 0; step < ladder.size(); ++step) {
      dyn = detail::make_dynamics(m, queue_model, ladder[step].first,
                                  ladder[step].second);
      SolverConfig cfg = m.solver;
      if (step + 1 < ladder.size()) {
        // Intermediate levels only seed the next one; a loose residual is
        // enough and much cheaper.
        cfg.residual_target = std::max(cfg.residual_target, 1e-8);
        cfg.residual_tol = std::max(cfg.residual_tol, 1e-6);
      }
      cur = detail::solve_ss2_fixed(dyn, cfg, m.truncation.max_states,
                                    step == 0 ? nullptr : &prev);
      prev = std::move(cur);
    }
    Ss2Result r = detail::measure_ss2(dyn, prev);
    r.pmf_kmax_used = queue_model.kmax_used;

    double worst = 0.0;
    for (int i = 0; i < 2; ++i)
      if (m.lambda[i] > 0.0)
        worst = std::max(
            worst, std::abs(r.throughput[i] - m.lambda[i]) / m.lambda[i]);
    if (!m.truncation.auto_grow || worst <= m.solver.throughput_rel_tol)
      return r;
    c1 *= 2;
    c2 *= 2;
  }
}

// Full proposed-method solve: exact station-1 chain plus reduced station-2
// chain; system waiting time is the sum of the per-station sojourn times.
struct TandemResult {
  StationResult station1;
  Ss2Result station2;
  std::array<double, 2> system_wait{0.0, 0.0};
};

inline TandemResult solve_tandem(const ModelParams& m) {
  TandemResult t;
  t.station1 = solve_ss1(m);
  t.station2 = solve_ss2(m);
  for (int i = 0; i < 2; ++i)
    t.system_wait[i] = t.station1.mean_wait[i] + t.station2.mean_wait[i];
  return t;
}

}  // namespace polling_tandem

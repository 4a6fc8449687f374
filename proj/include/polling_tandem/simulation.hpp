#pragma once

// Discrete-event simulation of the true two-station tandem polling system:
// Poisson arrivals, FIFO queues, each server cycling product 0 -> setup ->
// exhaust -> product 1 -> setup -> exhaust -> ..., setups incurred even into
// an empty queue (then switching onward). No approximation; serves as the
// ground-truth oracle with replication-based confidence intervals.
//
// Scheduling needs no event heap: at any instant the only pending events are
// the two next external arrivals and one activity completion per station.
// Simultaneous events are ordered by (time, source priority, station,
// product) with departures before setup completions before arrivals, so runs
// are bit-deterministic for a given configuration.

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "polling_tandem/params.hpp"

namespace polling_tandem {

struct SimConfig {
  double warmup = 2000.0;
  double horizon = 50000.0;  // statistics window length after warmup
  int replications = 10;
  std::uint64_t seed = 20240901ULL;

  void validate() const {
    if (warmup < 0.0 || !(horizon > 0.0) || replications < 2)
      throw std::invalid_argument(
          "sim config requires warmup >= 0, horizon > 0, replications >= 2");
  }
};

namespace rng {

// splitmix64: seeds the main generator and hashes (seed, stream, rep) tuples.
inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256++
struct Xoshiro256pp {
  std::array<std::uint64_t, 4> s{};

  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s) w = splitmix64(x);
  }
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }
  std::uint64_t next() {
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
  // uniform on (0, 1]: never zero, so -log is finite
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }
  double exponential(double rate) {
    if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
    return -std::log(uniform01()) / rate;
  }
};

inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t rep) {
  std::uint64_t x = base;
  std::uint64_t h = splitmix64(x);
  x = h ^ (stream * 0xA24BAED4963EE407ULL);
  h = splitmix64(x);
  x = h ^ (rep * 0x9FB21C651E98DF25ULL);
  return splitmix64(x);
}

}  // namespace rng

// One independent stream per stochastic source.
//   arrival of product i            -> stream i
//   service of product i, station j -> stream 2 + 2 j + i
//   setup for product i, station j  -> stream 6 + 2 j + i
inline constexpr std::uint64_t kArrivalStream(int product) { return product; }
inline constexpr std::uint64_t kServiceStream(int product, int station) {
  return 2 + 2 * station + product;
}
inline constexpr std::uint64_t kSetupStream(int product, int station) {
  return 6 + 2 * station + product;
}

struct ReplicationStats {
  // Indexing: [product][station]
  std::array<std::array<double, 2>, 2> w{};   // mean sojourn of departures
  std::array<std::array<double, 2>, 2> th{};  // departures / window
  std::array<std::array<double, 2>, 2> l{};   // time-average number present
  std::array<std::array<double, 2>, 2> busy_fraction{};  // serving i at j
  double little_worst = 0.0;  // max |l - th w| / l over cells with l > 0
};

struct SimResult {
  std::array<std::array<double, 2>, 2> w_mean{};
  std::array<std::array<double, 2>, 2> w_ci_halfwidth{};
  std::array<std::array<double, 2>, 2> th{};
  std::array<std::array<double, 2>, 2> l_mean{};
  std::array<double, 2> w_system_mean{};
  std::array<double, 2> w_system_ci_halfwidth{};
  std::vector<ReplicationStats> replications;
  std::int64_t exhaustiveness_violations = 0;
  double little_worst = 0.0;
};

// Signed percentage error of a model value against a simulated reference:
// positive when the model underestimates.
inline double error_delta(double w_sim, double w_model) {
  if (!(w_sim > 0.0))
    throw std::invalid_argument("error_delta requires a positive simulated value");
  return 100.0 * (w_sim - w_model) / w_sim;
}

namespace detail {

struct ServerState {
  bool in_setup = true;
  int product = 0;        // product being set up for or served
  double completion = 0;  // absolute time of the current activity's end
};

class TandemSimulator {
 public:
  TandemSimulator(const ModelParams& m, const SimConfig& cfg,
                  std::uint64_t rep)
      : m_(m), cfg_(cfg) {
    for (int i = 0; i < 2; ++i) {
      arrival_rng_[i] = make_rng(kArrivalStream(i), rep);
      for (int j = 0; j < 2; ++j) {
        service_rng_[i][j] = make_rng(kServiceStream(i, j), rep);
        setup_rng_[i][j] = make_rng(kSetupStream(i, j), rep);
      }
    }
    for (int i = 0; i < 2; ++i)
      next_arrival_[i] = draw_arrival(i);
    for (int j = 0; j < 2; ++j) {
      server_[j].in_setup = true;
      server_[j].product = 0;
      server_[j].completion = setup_rng_[0][j].exponential(m_.mu_setup[0][j]);
    }
  }

  ReplicationStats run() {
    const double t_begin = cfg_.warmup;
    const double t_end = cfg_.warmup + cfg_.horizon;
    while (true) {
      // Candidate events: station activity completions first (departures
      // before setup completions), then external arrivals; ties broken by
      // station then product.
      double t = std::numeric_limits<double>::infinity();
      int kind = -1, station = -1, product = -1;
      auto consider = [&](double when, int k, int st, int pr) {
        if (when < t || (when == t && (k < kind || (k == kind && (st < station ||
            (st == station && pr < product)))))) {
          t = when;
          kind = k;
          station = st;
          product = pr;
        }
      };
      for (int j = 0; j < 2; ++j)
        consider(server_[j].completion, server_[j].in_setup ? 1 : 0, j,
                 server_[j].product);
      for (int i = 0; i < 2; ++i) consider(next_arrival_[i], 2, -1, i);
      if (t > t_end) break;

      advance_clock(t, t_begin, t_end);
      if (kind == 2) {
        handle_arrival(product);
      } else if (kind == 0) {
        handle_departure(station);
      } else {
        handle_setup_completion(station);
      }
    }
    advance_clock(t_end, t_begin, t_end);
    return finalize(t_begin, t_end);
  }

  std::int64_t exhaustiveness_violations() const { return violations_; }

 private:
  rng::Xoshiro256pp make_rng(std::uint64_t stream, std::uint64_t rep) {
    return rng::Xoshiro256pp(rng::stream_seed(cfg_.seed, stream, rep));
  }
  double draw_arrival(int i) {
    return now_ + arrival_rng_[i].exponential(m_.lambda[i]);
  }

  // Accumulates the time-weighted queue and busy-time integrals over the
  // part of (now_, t] that lies inside the measurement window.
  void advance_clock(double t, double t_begin, double t_end) {
    const double lo = std::max(now_, t_begin);
    const double hi = std::min(t, t_end);
    if (hi > lo) {
      const double dt = hi - lo;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          l_area_[i][j] += dt * static_cast<double>(queue_[i][j].size());
      for (int j = 0; j < 2; ++j)
        if (!server_[j].in_setup)
          busy_[server_[j].product][j] += dt;
    }
    now_ = t;
  }

  void handle_arrival(int i) {
    queue_[i][0].push_back(now_);
    next_arrival_[i] = draw_arrival(i);
  }

  void enter(int j, int i) {
    // Called with the server at station j pointed at product i after an
    // activity completed: begin service if work is waiting, otherwise set up
    // for the other product.
    auto& sv = server_[j];
    if (!queue_[i][j].empty()) {
      sv.in_setup = false;
      sv.product = i;
      sv.completion = now_ + service_rng_[i][j].exponential(m_.mu[i][j]);
    } else {
      const int o = 1 - i;
      sv.in_setup = true;
      sv.product = o;
      sv.completion = now_ + setup_rng_[o][j].exponential(m_.mu_setup[o][j]);
    }
  }

  void handle_setup_completion(int j) {
    enter(j, server_[j].product);
  }

  void handle_departure(int j) {
    const int i = server_[j].product;
    if (queue_[i][j].empty())
      throw std::logic_error("service completed at an empty queue");
    const double arrived = queue_[i][j].front();
    queue_[i][j].pop_front();
    const double t_begin = cfg_.warmup, t_end = cfg_.warmup + cfg_.horizon;
    if (now_ >= t_begin && now_ <= t_end) {
      w_sum_[i][j] += now_ - arrived;
      departures_[i][j] += 1;
    }
    if (j == 0) queue_[i][1].push_back(now_);  // hand off to station 2

    // Exhaustive discipline: the server may only switch away when the queue
    // it was serving is empty.
    if (!queue_[i][j].empty()) {
      server_[j].in_setup = false;
      server_[j].completion = now_ + service_rng_[i][j].exponential(m_.mu[i][j]);
    } else {
      const int o = 1 - i;
      if (!queue_[i][j].empty()) ++violations_;  // re-check at switch-away
      server_[j].in_setup = true;
      server_[j].product = o;
      server_[j].completion = now_ + setup_rng_[o][j].exponential(m_.mu_setup[o][j]);
    }
  }

  ReplicationStats finalize(double t_begin, double t_end) const {
    ReplicationStats st;
    const double window = t_end - t_begin;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        st.th[i][j] = static_cast<double>(departures_[i][j]) / window;
        st.l[i][j] = l_area_[i][j] / window;
        st.w[i][j] = departures_[i][j] > 0
                         ? w_sum_[i][j] / static_cast<double>(departures_[i][j])
                         : 0.0;
        st.busy_fraction[i][j] = busy_[i][j] / window;
        if (st.l[i][j] > 0.0)
          st.little_worst =
              std::max(st.little_worst,
                       std::abs(st.l[i][j] - st.th[i][j] * st.w[i][j]) /
                           st.l[i][j]);
      }
    return st;
  }

  ModelParams m_;
  SimConfig cfg_;
  double now_ = 0.0;
  std::array<rng::Xoshiro256pp, 2> arrival_rng_{rng::Xoshiro256pp(0),
                                                rng::Xoshiro256pp(0)};
  std::array<std::array<rng::Xoshiro256pp, 2>, 2> service_rng_{
      {{rng::Xoshiro256pp(0), rng::Xoshiro256pp(0)},
       {rng::Xoshiro256pp(0), rng::Xoshiro256pp(0)}}};
  std::array<std::array<rng::Xoshiro256pp, 2>, 2> setup_rng_{
      {{rng::Xoshiro256pp(0), rng::Xoshiro256pp(0)},
       {rng::Xoshiro256pp(0), rng::Xoshiro256pp(0)}}};
  std::array<double, 2> next_arrival_{0.0, 0.0};
  std::array<ServerState, 2> server_{};
  std::array<std::array<std::deque<double>, 2>, 2> queue_{};  // [product][station]
  std::array<std::array<double, 2>, 2> l_area_{};
  std::array<std::array<double, 2>, 2> busy_{};
  std::array<std::array<double, 2>, 2> w_sum_{};
  std::array<std::array<std::int64_t, 2>, 2> departures_{};
  std::int64_t violations_ = 0;
};

inline double t_quantile_975(int dof) {
  const boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

}  // namespace detail

// Validation is intentionally looser than for the analytic solvers: a zero
// arrival rate is a legitimate degenerate simulation (single-product runs).
inline void validate_for_simulation(const ModelParams& m) {
  for (int i = 0; i < 2; ++i) {
    if (m.lambda[i] < 0.0)
      throw std::invalid_argument("lambda must be non-negative");
    for (int j = 0; j < 2; ++j)
      if (!(m.mu[i][j] > 0.0) || !(m.mu_setup[i][j] > 0.0))
        throw std::invalid_argument("service and setup rates must be positive");
  }
}

inline void to_json(nlohmann::json& j, const SimConfig& c) {
  j = nlohmann::json{{"warmup", c.warmup},
                     {"horizon", c.horizon},
                     {"replications", c.replications},
                     {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, SimConfig& c) {
  c.warmup = j.value("warmup", c.warmup);
  c.horizon = j.value("horizon", c.horizon);
  c.replications = j.value("replications", c.replications);
  c.seed = j.value("seed", c.seed);
  c.validate();
}

inline void to_json(nlohmann::json& j, const SimResult& r) {
  auto cell2 = [](const std::array<std::array<double, 2>, 2>& a) {
    return nlohmann::json{{a[0][0], a[0][1]}, {a[1][0], a[1][1]}};
  };
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& rep : r.replications)
    reps.push_back({{"w", cell2(rep.w)},
                    {"th", cell2(rep.th)},
                    {"l", cell2(rep.l)},
                    {"busy_fraction", cell2(rep.busy_fraction)},
                    {"little_worst", rep.little_worst}});
  j = nlohmann::json{{"w_mean", cell2(r.w_mean)},
                     {"w_ci_halfwidth", cell2(r.w_ci_halfwidth)},
                     {"th", cell2(r.th)},
                     {"l_mean", cell2(r.l_mean)},
                     {"w_system_mean", {r.w_system_mean[0], r.w_system_mean[1]}},
                     {"w_system_ci_halfwidth",
                      {r.w_system_ci_halfwidth[0], r.w_system_ci_halfwidth[1]}},
                     {"exhaustiveness_violations", r.exhaustiveness_violations},
                     {"little_worst", r.little_worst},
                     {"replications", reps}};
}

inline SimResult simulate(const ModelParams& m, const SimConfig& cfg) {
  validate_for_simulation(m);
  cfg.validate();
  SimResult out;
  out.replications.reserve(static_cast<std::size_t>(cfg.replications));
  for (int rep = 0; rep < cfg.replications; ++rep) {
    detail::TandemSimulator sim(m, cfg, static_cast<std::uint64_t>(rep));
    out.replications.push_back(sim.run());
    out.exhaustiveness_violations += sim.exhaustiveness_violations();
  }
  const int n = cfg.replications;
  const double tq = detail::t_quantile_975(n - 1);
  auto mean_ci = [&](auto&& get, double& mean, double& half) {
    double sum = 0.0;
    for (const auto& r : out.replications) sum += get(r);
    mean = sum / n;
    double ss = 0.0;
    for (const auto& r : out.replications) {
      const double d = get(r) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1));
    half = tq * sd / std::sqrt(static_cast<double>(n));
  };
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double dummy;
      mean_ci([&](const ReplicationStats& r) { return r.w[i][j]; },
              out.w_mean[i][j], out.w_ci_halfwidth[i][j]);
      mean_ci([&](const ReplicationStats& r) { return r.th[i][j]; },
              out.th[i][j], dummy);
      mean_ci([&](const ReplicationStats& r) { return r.l[i][j]; },
              out.l_mean[i][j], dummy);
    }
    mean_ci([&](const ReplicationStats& r) { return r.w[i][0] + r.w[i][1]; },
            out.w_system_mean[i], out.w_system_ci_halfwidth[i]);
  }
  for (const auto& r : out.replications)
    out.little_worst = std::max(out.little_worst, r.little_worst);
  return out;
}

}  // namespace polling_tandem

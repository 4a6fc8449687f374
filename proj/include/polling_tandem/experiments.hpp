#pragma once

// The five reference experiment suites (symmetric, station asymmetry via
// service rates, product asymmetry via service rates, station asymmetry via
// setup rates, product asymmetry via setup rates), the machinery to run each
// row with the proposed decomposition, the naive baseline and the simulation
// oracle, and the rendering of comparison tables with signed error columns.
//
// All grids use lambda_i = 1 and derive service rates from the target
// utilisations (mu = 2 lambda / rho per product under symmetry), so the
// utilisation column is authoritative.

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "polling_tandem/baseline.hpp"
#include "polling_tandem/params.hpp"
#include "polling_tandem/report.hpp"
#include "polling_tandem/simulation.hpp"
#include "polling_tandem/ss1.hpp"
#include "polling_tandem/ss2.hpp"

namespace polling_tandem {

struct SuiteRow {
  std::string suite;
  int row = 0;  // 1-based within the suite
  ModelParams params;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{
      "symmetric", "station_asym_service", "product_asym_service",
      "station_asym_setup", "product_asym_setup"};
  return names;
}

// Parameter grid of one suite. Utilisation grids are exact rationals so that
// rerunning a suite is bit-reproducible.
inline std::vector<SuiteRow> make_suite(const std::string& name) {
  std::vector<SuiteRow> rows;
  auto base = []() {
    ModelParams m;
    m.lambda = {1.0, 1.0};
    return m;
  };
  auto push = [&](ModelParams m) {
    rows.push_back(SuiteRow{std::string(), static_cast<int>(rows.size()) + 1,
                            std::move(m)});
  };
  const std::vector<double> setup_blocks{1.0, 1.5, 2.0, 5.0};
  const std::vector<double> station_loads{0.5, 0.6, 0.7};

  if (name == "symmetric") {
    // Both products and both stations identical; mu = 2 / rho.
    for (double mus : setup_blocks)
      for (double rho : station_loads) {
        ModelParams m = base();
        const double mu = 2.0 / rho;
        m.mu = {{{mu, mu}, {mu, mu}}};
        m.mu_setup = {{{mus, mus}, {mus, mus}}};
        push(std::move(m));
      }
  } else if (name == "station_asym_service") {
    // One station loaded at 0.8 (mu = 2.5), the other swept over the load
    // grid; first the upstream bottleneck, then the downstream one.
    for (double mus : setup_blocks)
      for (int bottleneck_station = 0; bottleneck_station < 2;
           ++bottleneck_station)
        for (double rho : station_loads) {
          ModelParams m = base();
          const double mu_other = 2.0 / rho;
          const double mu_bneck = 2.5;
          for (int i = 0; i < 2; ++i) {
            m.mu[i][bottleneck_station] = mu_bneck;
            m.mu[i][1 - bottleneck_station] = mu_other;
          }
          m.mu_setup = {{{mus, mus}, {mus, mus}}};
          push(std::move(m));
        }
  } else if (name == "product_asym_service") {
    // Product 1 fixed at mu = 2.5; product 2 faster, with rate ratios
    // mu_1 / mu_2 in {0.4, 0.6, 0.8} at both stations.
    const std::vector<double> mu2_grid{6.25, 25.0 / 6.0, 3.125};
    for (double mus : setup_blocks)
      for (double mu2 : mu2_grid) {
        ModelParams m = base();
        m.mu = {{{2.5, 2.5}, {mu2, mu2}}};
        m.mu_setup = {{{mus, mus}, {mus, mus}}};
        push(std::move(m));
      }
  } else if (name == "station_asym_setup") {
    // Service rates symmetric (load grid extended to 0.8); setups fast at
    // one station (rate 5) and slow at the other (rate 1).
    const std::vector<double> loads{0.5, 0.6, 0.7, 0.8};
    for (int bottleneck_station = 0; bottleneck_station < 2;
         ++bottleneck_station)
      for (double rho : loads) {
        ModelParams m = base();
        const double mu = 2.0 / rho;
        m.mu = {{{mu, mu}, {mu, mu}}};
        for (int i = 0; i < 2; ++i) {
          m.mu_setup[i][bottleneck_station] = 1.0;
          m.mu_setup[i][1 - bottleneck_station] = 5.0;
        }
        push(std::move(m));
      }
  } else if (name == "product_asym_setup") {
    // Symmetric service (mu in {2.5, 4}); product 1 setup rate 1, product 2
    // setups faster: mean setups {0.4, 0.6, 0.8}.
    const std::vector<double> mu_blocks{2.5, 4.0};
    const std::vector<double> mus2_grid{2.5, 5.0 / 3.0, 1.25};
    for (double mu : mu_blocks)
      for (double mus2 : mus2_grid) {
        ModelParams m = base();
        m.mu = {{{mu, mu}, {mu, mu}}};
        m.mu_setup = {{{1.0, 1.0}, {mus2, mus2}}};
        push(std::move(m));
      }
  } else {
    throw std::invalid_argument("unknown suite: " + name);
  }
  for (auto& r : rows) r.suite = name;
  return rows;
}

struct ExperimentOptions {
  bool with_simulation = true;
  SimConfig sim;
  int threads = 0;  // 0: take POLLING_TANDEM_THREADS, default 1
};

struct ExperimentRowResult {
  SuiteRow def;
  PerformanceReport proposed;
  PerformanceReport baseline;
  PerformanceReport simulation;  // valid when has_simulation
  bool has_simulation = false;
};

inline PerformanceReport report_from_tandem(const TandemResult& t) {
  PerformanceReport r;
  r.method = "proposed";
  for (int i = 0; i < 2; ++i) {
    r.th[i][0] = t.station1.throughput[i];
    r.l[i][0] = t.station1.mean_queue[i];
    r.w[i][0] = t.station1.mean_wait[i];
    r.th[i][1] = t.station2.throughput[i];
    r.l[i][1] = t.station2.mean_queue[i];
    r.w[i][1] = t.station2.mean_wait[i];
    r.w_system[i] = t.system_wait[i];
  }
  r.residual = std::max(t.station1.residual_inf, t.station2.residual_inf);
  r.caps_used = {t.station1.cap_used, t.station2.cap_station2_used};
  r.pmf_cap_used = t.station2.pmf_kmax_used;
  r.check_consistency();
  return r;
}

inline PerformanceReport report_from_baseline(const BaselineResult& b) {
  PerformanceReport r;
  r.method = "baseline";
  for (int i = 0; i < 2; ++i) {
    r.th[i][0] = b.station1.throughput[i];
    r.l[i][0] = b.station1.mean_queue[i];
    r.w[i][0] = b.station1.mean_wait[i];
    r.th[i][1] = b.station2.throughput[i];
    r.l[i][1] = b.station2.mean_queue[i];
    r.w[i][1] = b.station2.mean_wait[i];
    r.w_system[i] = b.system_wait[i];
  }
  r.residual = std::max(b.station1.residual_inf, b.station2.residual_inf);
  r.caps_used = {b.station1.cap_used, b.station2.cap_used};
  r.check_consistency();
  return r;
}

// The simulation's W and TH are the primary estimates; L is derived as
// TH * W so the report satisfies its identity exactly. The independently
// measured time-average queue length stays in SimResult (the Little's-law
// check compares the two).
inline PerformanceReport report_from_simulation(const SimResult& s) {
  PerformanceReport r;
  r.method = "simulation";
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      r.th[i][j] = s.th[i][j];
      r.w[i][j] = s.w_mean[i][j];
      r.l[i][j] = s.th[i][j] * s.w_mean[i][j];
    }
    r.w_system[i] = s.w_system_mean[i];
  }
  r.check_consistency();
  return r;
}

inline void attach_errors(PerformanceReport& model,
                          const PerformanceReport& sim) {
  for (int i = 0; i < 2; ++i) {
    model.delta_w2[i] = error_delta(sim.w[i][1], model.w[i][1]);
    model.delta_w[i] = error_delta(sim.w_system[i], model.w_system[i]);
  }
}

inline ExperimentRowResult run_row(const SuiteRow& def,
                                   const ExperimentOptions& opt) {
  ExperimentRowResult out;
  out.def = def;
  validate(def.params);
  out.proposed = report_from_tandem(solve_tandem(def.params));
  out.baseline = report_from_baseline(solve_simple_decomposition(def.params));
  if (opt.with_simulation) {
    out.simulation = report_from_simulation(simulate(def.params, opt.sim));
    out.has_simulation = true;
    attach_errors(out.proposed, out.simulation);
    attach_errors(out.baseline, out.simulation);
  }
  return out;
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("POLLING_TANDEM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

// Runs a fixed list of rows; rows execute in parallel up to the thread cap
// and are assembled in row order, so output is independent of scheduling.
inline std::vector<ExperimentRowResult> run_rows(
    const std::vector<SuiteRow>& defs, const ExperimentOptions& opt = {}) {
  std::vector<ExperimentRowResult> results(defs.size());
  const int threads =
      std::min<int>(resolve_threads(opt.threads), static_cast<int>(defs.size()));
  if (threads <= 1) {
    for (std::size_t k = 0; k < defs.size(); ++k)
      results[k] = run_row(defs[k], opt);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w]() {
      try {
        for (;;) {
          const std::size_t k = next.fetch_add(1);
          if (k >= defs.size()) return;
          results[k] = run_row(defs[k], opt);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

inline std::vector<ExperimentRowResult> run_experiment(
    const std::string& suite, const ExperimentOptions& opt = {}) {
  return run_rows(make_suite(suite), opt);
}

// ---------------------------------------------------------------------------
// Table rendering. One uniform schema across suites: inputs, proposed,
// simulation, signed errors, then the baseline columns.

inline const std::vector<std::string>& experiment_table_header() {
  static const std::vector<std::string> h{
      "suite",     "row",       "mu_s11",    "mu_s21",   "mu_s12",
      "mu_s22",    "mu11",      "mu21",      "mu12",     "mu22",
      "rho1",      "rho2",      "w11",       "w21",      "w12",
      "w22",       "w1",        "w2",        "w11_sim",  "w21_sim",
      "w12_sim",   "w22_sim",   "w1_sim",    "w2_sim",   "delta_w12",
      "delta_w22", "delta_w1",  "delta_w2",  "w12_base", "w22_base",
      "w1_base",   "w2_base"};
  return h;
}

inline Table build_experiment_table(
    const std::vector<ExperimentRowResult>& rows) {
  Table t;
  t.header = experiment_table_header();
  for (const auto& r : rows) {
    const ModelParams& m = r.def.params;
    std::vector<Cell> row;
    row.push_back(Cell::of_text(r.def.suite));
    row.push_back(Cell::of_number(r.def.row, 0));
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i)
        row.push_back(Cell::of_number(m.mu_setup[i][j]));
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) row.push_back(Cell::of_number(m.mu[i][j]));
    row.push_back(Cell::of_short_number(m.rho_station(0)));
    row.push_back(Cell::of_short_number(m.rho_station(1)));
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i)
        row.push_back(Cell::of_number(r.proposed.w[i][j]));
    for (int i = 0; i < 2; ++i)
      row.push_back(Cell::of_number(r.proposed.w_system[i]));
    if (r.has_simulation) {
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i)
          row.push_back(Cell::of_number(r.simulation.w[i][j]));
      for (int i = 0; i < 2; ++i)
        row.push_back(Cell::of_number(r.simulation.w_system[i]));
      for (int i = 0; i < 2; ++i)
        row.push_back(Cell::of_number(r.proposed.delta_w2[i]));
      for (int i = 0; i < 2; ++i)
        row.push_back(Cell::of_number(r.proposed.delta_w[i]));
    } else {
      for (int k = 0; k < 10; ++k) row.push_back(Cell::blank());
    }
    for (int i = 0; i < 2; ++i)
      row.push_back(Cell::of_number(r.baseline.w[i][1]));
    for (int i = 0; i < 2; ++i)
      row.push_back(Cell::of_number(r.baseline.w_system[i]));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Summary: pooled |error| statistics over rendered result tables.

struct ErrorSummary {
  SummaryStats station2;  // |delta| of the station-2 waiting times
  SummaryStats system;    // |delta| of the system waiting times
};

inline ErrorSummary summarize_errors(
    const std::vector<std::vector<std::string>>& csv_rows) {
  if (csv_rows.empty()) throw std::invalid_argument("empty results table");
  const auto& header = csv_rows.front();
  std::vector<std::size_t> st2_cols, sys_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "delta_w12" || header[c] == "delta_w22")
      st2_cols.push_back(c);
    if (header[c] == "delta_w1" || header[c] == "delta_w2")
      sys_cols.push_back(c);
  }
  if (st2_cols.empty() || sys_cols.empty())
    throw std::invalid_argument("results table lacks error columns");
  std::vector<double> st2, sys;
  for (std::size_t r = 1; r < csv_rows.size(); ++r) {
    const auto& row = csv_rows[r];
    auto collect = [&](const std::vector<std::size_t>& cols,
                       std::vector<double>& into) {
      for (std::size_t c : cols)
        if (c < row.size() && !row[c].empty())
          into.push_back(std::abs(std::stod(row[c])));
    };
    collect(st2_cols, st2);
    collect(sys_cols, sys);
  }
  if (st2.empty() || sys.empty())
    throw std::invalid_argument("results table has no error values");
  return ErrorSummary{summarize(st2), summarize(sys)};
}

inline Table build_summary_table(const ErrorSummary& s) {
  Table t;
  t.header = {"statistic", "abs_delta_w_i2", "abs_delta_w_i"};
  auto push = [&](const char* name, double a, double b) {
    t.rows.push_back({Cell::of_text(name), Cell::of_number(a),
                      Cell::of_number(b)});
  };
  push("average", s.station2.mean, s.system.mean);
  push("standard_deviation", s.station2.sd, s.system.sd);
  push("percentile_50", s.station2.p50, s.system.p50);
  push("percentile_75", s.station2.p75, s.system.p75);
  return t;
}

}  // namespace polling_tandem

// Command-line front end: single solves (exact station-1 chain, reduced
// station-2 chain, naive baseline), simulation runs, the five experiment
// suites, and error summaries over result tables.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polling_tandem/polling_tandem.hpp"

namespace pt = polling_tandem;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_path;
  std::string format;  // json | csv | markdown (subcommand-dependent default)
  std::optional<std::uint64_t> seed;
  std::vector<int> caps;
};

json load_config(const GlobalOptions& g) {
  if (g.config_path.empty()) return json::object();
  std::ifstream in(g.config_path);
  if (!in) throw std::runtime_error("cannot open config: " + g.config_path);
  json j;
  in >> j;
  return j;
}

pt::ModelParams model_from(const json& cfg, const GlobalOptions& g) {
  pt::ModelParams m;
  if (!cfg.empty()) m = cfg.get<pt::ModelParams>();
  if (!g.caps.empty()) {
    auto& t = m.truncation;
    if (g.caps.size() == 1) {
      t.queue_cap_ss1 = t.queue_cap_ss2_st1 = t.queue_cap_ss2_st2 = g.caps[0];
      t.pmf_cap = g.caps[0];
    } else if (g.caps.size() == 3 || g.caps.size() == 4) {
      t.queue_cap_ss1 = g.caps[0];
      t.queue_cap_ss2_st1 = g.caps[1];
      t.queue_cap_ss2_st2 = g.caps[2];
      if (g.caps.size() == 4) t.pmf_cap = g.caps[3];
    } else {
      throw std::runtime_error(
          "--caps takes 1, 3 or 4 values: all | ss1,ss2_st1,ss2_st2[,pmf]");
    }
    t.validate();
  }
  return m;
}

pt::SimConfig sim_config_from(const json& cfg, const GlobalOptions& g) {
  pt::SimConfig s;
  if (cfg.contains("sim")) s = cfg.at("sim").get<pt::SimConfig>();
  if (g.seed) s.seed = *g.seed;
  return s;
}

void emit(const GlobalOptions& g, const std::string& text) {
  if (g.out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(g.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + g.out_path);
  out << text;
}

std::string render_table(const pt::Table& t, const std::string& format) {
  if (format == "markdown") return pt::render_markdown(t);
  if (format == "csv" || format.empty()) return pt::render_csv(t);
  throw std::runtime_error("unsupported table format: " + format);
}

json station_json(const pt::StationResult& r) {
  return json{{"th", {r.throughput[0], r.throughput[1]}},
              {"l", {r.mean_queue[0], r.mean_queue[1]}},
              {"w", {r.mean_wait[0], r.mean_wait[1]}},
              {"residual", r.residual_inf},
              {"caps_used", r.cap_used}};
}

int run_solve_ss1(const GlobalOptions& g) {
  const json cfg = load_config(g);
  const pt::ModelParams m = model_from(cfg, g);
  pt::validate(m);
  const pt::StationResult r = pt::solve_ss1(m);
  emit(g, station_json(r).dump(2));
  return 0;
}

int run_solve_ss2(const GlobalOptions& g) {
  const json cfg = load_config(g);
  const pt::ModelParams m = model_from(cfg, g);
  pt::validate(m);
  const pt::TandemResult t = pt::solve_tandem(m);
  const auto& r = t.station2;
  const auto fit = pt::fit_intervisit(pt::station1_params(m),
                                      m.solver.variance_convention);
  json out{{"method", "proposed"},
           {"th2", {r.throughput[0], r.throughput[1]}},
           {"l2", {r.mean_queue[0], r.mean_queue[1]}},
           {"w2", {r.mean_wait[0], r.mean_wait[1]}},
           {"w_system", {t.system_wait[0], t.system_wait[1]}},
           {"residual", r.residual_inf},
           {"caps_used", {r.cap_station1_used, r.cap_station2_used}},
           {"pmf_cap_used", r.pmf_kmax_used},
           {"station1", station_json(t.station1)},
           {"intervisit",
            {{"mean", {fit.mean_intervisit[0], fit.mean_intervisit[1]}},
             {"variance", {fit.var_intervisit[0], fit.var_intervisit[1]}},
             {"gamma_shape", {fit.gamma_shape[0], fit.gamma_shape[1]}},
             {"gamma_scale", {fit.gamma_scale[0], fit.gamma_scale[1]}}}}};
  emit(g, out.dump(2));
  return 0;
}

int run_baseline(const GlobalOptions& g) {
  const json cfg = load_config(g);
  const pt::ModelParams m = model_from(cfg, g);
  pt::validate(m);
  const pt::BaselineResult b = pt::solve_simple_decomposition(m);
  json out{{"method", "baseline"},
           {"th2", {b.station2.throughput[0], b.station2.throughput[1]}},
           {"l2", {b.station2.mean_queue[0], b.station2.mean_queue[1]}},
           {"w2", {b.station2.mean_wait[0], b.station2.mean_wait[1]}},
           {"w_system", {b.system_wait[0], b.system_wait[1]}},
           {"residual",
            std::max(b.station1.residual_inf, b.station2.residual_inf)},
           {"caps_used", {b.station1.cap_used, b.station2.cap_used}},
           {"station1", station_json(b.station1)}};
  emit(g, out.dump(2));
  return 0;
}

int run_simulate(const GlobalOptions& g) {
  const json cfg = load_config(g);
  const pt::ModelParams m = model_from(cfg, g);
  const pt::SimConfig sc = sim_config_from(cfg, g);
  const pt::SimResult r = pt::simulate(m, sc);
  json out = r;
  out["config"] = sc;
  emit(g, out.dump(2));
  return 0;
}

int run_experiment(const GlobalOptions& g, const std::string& suite,
                   bool no_sim) {
  const json cfg = load_config(g);
  pt::ExperimentOptions opt;
  opt.with_simulation = !no_sim;
  opt.sim = sim_config_from(cfg, g);
  // Row parameters come from the suite grid; the config may still override
  // truncation/solver settings and the simulation block.
  const pt::ModelParams overrides = model_from(cfg, g);
  auto rows = pt::make_suite(suite);
  std::vector<pt::ExperimentRowResult> results(rows.size());
  for (auto& r : rows) {
    r.params.truncation = overrides.truncation;
    r.params.solver = overrides.solver;
  }
  results = pt::run_rows(rows, opt);
  const pt::Table table = pt::build_experiment_table(results);
  emit(g, render_table(table, g.format));
  return 0;
}

int run_summary(const GlobalOptions& g, const std::vector<std::string>& files) {
  if (files.empty()) throw std::runtime_error("summary needs result CSV files");
  std::vector<std::vector<std::string>> merged;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open results: " + f);
    std::stringstream ss;
    ss << in.rdbuf();
    auto rows = pt::parse_csv(ss.str());
    if (rows.empty()) continue;
    if (merged.empty()) {
      merged = rows;
    } else {
      if (rows.front() != merged.front())
        throw std::runtime_error("result tables have mismatched headers: " + f);
      merged.insert(merged.end(), rows.begin() + 1, rows.end());
    }
  }
  const pt::ErrorSummary s = pt::summarize_errors(merged);
  emit(g, render_table(pt::build_summary_table(s), g.format));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Performance analysis of a two-product, two-station tandem polling "
      "system with exhaustive service and exponential setups"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path,
                 "JSON config (model parameters, optional \"sim\" block)");
  app.add_option("--out", g.out_path, "output file (default: stdout)");
  app.add_option("--format", g.format, "output format: json | csv | markdown");
  std::uint64_t seed_value = 0;
  auto* seed_opt =
      app.add_option("--seed", seed_value, "base random seed for simulations");
  app.add_option("--caps", g.caps,
                 "truncation caps: one value for all, or ss1,ss2_st1,ss2_st2[,pmf]")
      ->delimiter(',');

  auto* ss1 = app.add_subcommand("solve-ss1", "exact station-1 polling chain");
  auto* ss2 = app.add_subcommand(
      "solve-ss2", "reduced station-2 chain (with station-1 system totals)");
  auto* base = app.add_subcommand(
      "baseline", "independent-station decomposition (comparator)");
  auto* sim = app.add_subcommand("simulate", "discrete-event simulation oracle");
  auto* exp = app.add_subcommand("experiment", "run a reference suite");
  std::string suite;
  bool no_sim = false;
  exp->add_option("--suite", suite, "suite name")
      ->required()
      ->check(CLI::IsMember(pt::suite_names()));
  exp->add_flag("--no-sim", no_sim, "skip the simulation columns");
  auto* summary =
      app.add_subcommand("summary", "pooled |error| statistics over result CSVs");
  std::vector<std::string> summary_files;
  summary->add_option("files", summary_files, "result CSV files");

  // Let the shared flags (--config, --caps, ...) be written after the
  // subcommand name as well.
  for (auto* sub : {ss1, ss2, base, sim, exp, summary}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed_value;

  try {
    if (ss1->parsed()) return run_solve_ss1(g);
    if (ss2->parsed()) return run_solve_ss2(g);
    if (base->parsed()) return run_baseline(g);
    if (sim->parsed()) return run_simulate(g);
    if (exp->parsed()) return run_experiment(g, suite, no_sim);
    if (summary->parsed()) return run_summary(g, summary_files);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

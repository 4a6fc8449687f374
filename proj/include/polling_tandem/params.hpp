#pragma once

// Model parameters and configuration for the two-product, two-station tandem
// polling solver. Conventions: product index i in {0,1}, station index j in
// {0,1} (0 = upstream). All rates are per unit time.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace polling_tandem {

using json = nlohmann::json;

enum class SolveMethod { Auto, Direct, GaussSeidel, Power };

// Interpretation of the squared service-time term in the intervisit variance
// approximation: the second moment of an exponential (2/mu^2, default) or the
// squared mean (1/mu^2).
enum class VarianceConvention { SecondMoment, SquaredMean };

struct TruncationConfig {
  int queue_cap_ss1 = 64;      // per-product queue cap, station-1 chain
  int queue_cap_ss2_st1 = 64;  // in-service product cap inside the joint chain
  int queue_cap_ss2_st2 = 64;  // per-product station-2 queue cap
  int pmf_cap = 64;            // support cap for the setup-completion queue pmf
  bool auto_grow = true;       // double caps until throughput loss is negligible
  std::int64_t max_states = 12'000'000;

  void validate() const {
    if (queue_cap_ss1 < 2 || queue_cap_ss2_st1 < 2 || queue_cap_ss2_st2 < 2 ||
        pmf_cap < 2)
      throw std::invalid_argument("truncation: all caps must be >= 2");
    if (max_states < 16)
      throw std::invalid_argument("truncation: max_states too small");
  }
};

struct SolverConfig {
  SolveMethod method = SolveMethod::Auto;
  double tol = 1e-12;            // L1 change between iterates
  double residual_target = 1e-11;  // stationarity residual, relative to max rate
  double residual_tol = 1e-10;     // hard postcondition on the returned solution
  int max_sweeps = 60'000;         // Gauss-Seidel sweep budget
  std::int64_t max_power_iters = 4'000'000;
  int direct_threshold = 50'000;   // states at or below this use sparse LU
  double relaxation = 1.0;         // successive over-relaxation factor
  VarianceConvention variance_convention = VarianceConvention::SecondMoment;
  double throughput_rel_tol = 1e-3;  // truncation adequacy: |TH - lambda|/lambda
};

struct ModelParams {
  std::array<double, 2> lambda{1.0, 1.0};
  // mu[i][j]: service rate of product i at station j.
  std::array<std::array<double, 2>, 2> mu{{{4.0, 4.0}, {4.0, 4.0}}};
  // mu_setup[i][j]: setup rate incurred when station j switches to product i.
  std::array<std::array<double, 2>, 2> mu_setup{{{1.0, 1.0}, {1.0, 1.0}}};
  TruncationConfig truncation;
  SolverConfig solver;

  double rho_ij(int i, int j) const { return lambda[i] / mu[i][j]; }
  double rho_station(int j) const { return rho_ij(0, j) + rho_ij(1, j); }
};

// Validates rates and stability. Returns human-readable warnings (currently
// only the near-critical-load advisory); throws std::invalid_argument on hard
// violations.
inline std::vector<std::string> validate(const ModelParams& p) {
  p.truncation.validate();
  for (int i = 0; i < 2; ++i) {
    if (!(p.lambda[i] > 0.0))
      throw std::invalid_argument("lambda must be positive");
    for (int j = 0; j < 2; ++j) {
      if (!(p.mu[i][j] > 0.0))
        throw std::invalid_argument("mu must be positive");
      if (!(p.mu_setup[i][j] > 0.0))
        throw std::invalid_argument("mu_setup must be positive");
    }
  }
  std::vector<std::string> warnings;
  for (int j = 0; j < 2; ++j) {
    const double rho = p.rho_station(j);
    if (rho >= 1.0 - 1e-9)
      throw std::invalid_argument("unstable: station " + std::to_string(j + 1) +
                                  " utilization " + std::to_string(rho) +
                                  " >= 1");
    if (rho > 0.9)
      warnings.push_back("station " + std::to_string(j + 1) + " utilization " +
                         std::to_string(rho) +
                         " > 0.9; truncation error may be large");
  }
  return warnings;
}

inline const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::Auto: return "auto";
    case SolveMethod::Direct: return "direct";
    case SolveMethod::GaussSeidel: return "gauss_seidel";
    case SolveMethod::Power: return "power";
  }
  return "?";
}

inline SolveMethod solve_method_from_string(const std::string& s) {
  if (s == "auto") return SolveMethod::Auto;
  if (s == "direct") return SolveMethod::Direct;
  if (s == "gauss_seidel") return SolveMethod::GaussSeidel;
  if (s == "power") return SolveMethod::Power;
  throw std::invalid_argument("unknown solver method: " + s);
}

// JSON schema: product-major nested arrays, indices 1-based in the document
// in the sense that mu[0] belongs to product 1. Absent keys keep defaults.
inline void from_json(const json& j, TruncationConfig& t) {
  t.queue_cap_ss1 = j.value("queue_cap_ss1", t.queue_cap_ss1);
  t.queue_cap_ss2_st1 = j.value("queue_cap_ss2_st1", t.queue_cap_ss2_st1);
  t.queue_cap_ss2_st2 = j.value("queue_cap_ss2_st2", t.queue_cap_ss2_st2);
  t.pmf_cap = j.value("pmf_cap", t.pmf_cap);
  t.auto_grow = j.value("auto_grow", t.auto_grow);
  t.max_states = j.value("max_states", t.max_states);
}

inline void to_json(json& j, const TruncationConfig& t) {
  j = json{{"queue_cap_ss1", t.queue_cap_ss1},
           {"queue_cap_ss2_st1", t.queue_cap_ss2_st1},
           {"queue_cap_ss2_st2", t.queue_cap_ss2_st2},
           {"pmf_cap", t.pmf_cap},
           {"auto_grow", t.auto_grow},
           {"max_states", t.max_states}};
}

inline void from_json(const json& j, SolverConfig& s) {
  if (j.contains("method")) s.method = solve_method_from_string(j.at("method"));
  s.tol = j.value("tol", s.tol);
  s.residual_target = j.value("residual_target", s.residual_target);
  s.residual_tol = j.value("residual_tol", s.residual_tol);
  s.max_sweeps = j.value("max_sweeps", s.max_sweeps);
  s.max_power_iters = j.value("max_power_iters", s.max_power_iters);
  s.direct_threshold = j.value("direct_threshold", s.direct_threshold);
  s.relaxation = j.value("relaxation", s.relaxation);
  s.throughput_rel_tol = j.value("throughput_rel_tol", s.throughput_rel_tol);
  if (j.contains("variance_convention")) {
    const std::string v = j.at("variance_convention");
    if (v == "second_moment")
      s.variance_convention = VarianceConvention::SecondMoment;
    else if (v == "squared_mean")
      s.variance_convention = VarianceConvention::SquaredMean;
    else
      throw std::invalid_argument("unknown variance_convention: " + v);
  }
}

inline void to_json(json& j, const SolverConfig& s) {
  j = json{{"method", to_string(s.method)},
           {"tol", s.tol},
           {"residual_target", s.residual_target},
           {"residual_tol", s.residual_tol},
           {"max_sweeps", s.max_sweeps},
           {"max_power_iters", s.max_power_iters},
           {"direct_threshold", s.direct_threshold},
           {"relaxation", s.relaxation},
           {"throughput_rel_tol", s.throughput_rel_tol},
           {"variance_convention",
            s.variance_convention == VarianceConvention::SecondMoment
                ? "second_moment"
                : "squared_mean"}};
}

inline void from_json(const json& j, ModelParams& p) {
  if (j.contains("lambda")) {
    const auto& a = j.at("lambda");
    if (!a.is_array() || a.size() != 2)
      throw std::invalid_argument("lambda must be an array of 2 rates");
    p.lambda = {a[0].get<double>(), a[1].get<double>()};
  }
  auto read22 = [&](const char* key, std::array<std::array<double, 2>, 2>& m) {
    if (!j.contains(key)) return;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2 || !a[0].is_array() || a[0].size() != 2 ||
        !a[1].is_array() || a[1].size() != 2)
      throw std::invalid_argument(std::string(key) + " must be a 2x2 array");
    for (int i = 0; i < 2; ++i)
      for (int jj = 0; jj < 2; ++jj) m[i][jj] = a[i][jj].get<double>();
  };
  read22("mu", p.mu);
  read22("mu_setup", p.mu_setup);
  if (j.contains("truncation")) j.at("truncation").get_to(p.truncation);
  if (j.contains("solver")) j.at("solver").get_to(p.solver);
}

inline void to_json(json& j, const ModelParams& p) {
  j = json{{"lambda", p.lambda},
           {"mu", {{p.mu[0][0], p.mu[0][1]}, {p.mu[1][0], p.mu[1][1]}}},
           {"mu_setup",
            {{p.mu_setup[0][0], p.mu_setup[0][1]},
             {p.mu_setup[1][0], p.mu_setup[1][1]}}},
           {"truncation", p.truncation},
           {"solver", p.solver}};
}

}  // namespace polling_tandem

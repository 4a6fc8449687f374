#pragma once

// Simple-decomposition comparator: the tandem is treated as two independent
// polling stations, station 2 fed by independent Poisson streams at the
// external arrival rates. By construction the station-2 result ignores the
// station-1 service rates entirely, which is precisely the defect the
// coupled model corrects.

#include <array>

#include "polling_tandem/params.hpp"
#include "polling_tandem/ss1.hpp"

namespace polling_tandem {

struct BaselineResult {
  StationResult station1;
  StationResult station2;
  std::array<double, 2> system_wait{0.0, 0.0};
};

inline StationParams station2_params(const ModelParams& m) {
  StationParams p;
  p.lambda = m.lambda;
  p.mu = {m.mu[0][1], m.mu[1][1]};
  p.mu_setup = {m.mu_setup[0][1], m.mu_setup[1][1]};
  return p;
}

inline BaselineResult solve_simple_decomposition(const ModelParams& m) {
  BaselineResult r;
  r.station1 = solve_ss1(m);
  r.station2 = solve_station(station2_params(m), m.truncation.queue_cap_ss1,
                             m.solver, m.truncation.auto_grow,
                             m.truncation.max_states);
  for (int i = 0; i < 2; ++i)
    r.system_wait[i] = r.station1.mean_wait[i] + r.station2.mean_wait[i];
  return r;
}

}  // namespace polling_tandem

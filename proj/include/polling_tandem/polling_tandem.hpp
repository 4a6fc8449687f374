#pragma once

// Umbrella header for the polling-tandem performance library: two products
// flowing through two polling stations in series, exhaustive service,
// exponential setups. Provides an exact single-station chain, a reduced
// two-station chain driven by an intervisit-time model, a naive
// independent-station baseline, a discrete-event simulation oracle, and the
// reference experiment suites.

#include "polling_tandem/params.hpp"        // IWYU pragma: export
#include "polling_tandem/ctmc.hpp"          // IWYU pragma: export
#include "polling_tandem/ss1.hpp"           // IWYU pragma: export
#include "polling_tandem/intervisit.hpp"    // IWYU pragma: export
#include "polling_tandem/ss2.hpp"           // IWYU pragma: export
#include "polling_tandem/baseline.hpp"      // IWYU pragma: export
#include "polling_tandem/simulation.hpp"    // IWYU pragma: export
#include "polling_tandem/report.hpp"        // IWYU pragma: export
#include "polling_tandem/experiments.hpp"   // IWYU pragma: export

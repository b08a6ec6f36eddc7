#pragma once

// Staleness-cost and update-value analysis for an M/M/1 FCFS status-update
// stream: closed forms, quadrature, seeded simulation, utilization sweeps.

#include "freshsim/analytic.hpp"
#include "freshsim/costmodel.hpp"
#include "freshsim/io.hpp"
#include "freshsim/sim.hpp"
#include "freshsim/specfun.hpp"
#include "freshsim/sweep.hpp"

namespace freshsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace freshsim

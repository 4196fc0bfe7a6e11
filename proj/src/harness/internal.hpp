#pragma once

#include "radtrans/harness.hpp"

namespace radtrans::harness {

/// Largest temperature imposed by either boundary (0 for vacuum and zero flux).
double boundary_temperature_bound(const SimulationConfig& config);

}  // namespace radtrans::harness

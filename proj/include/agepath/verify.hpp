#pragma once

#include "agepath/acs.hpp"
#include "agepath/models/plugin.hpp"

#include <memory>

namespace agepath {

// ACS tight enough for central differences. Outer iterations converge
// linearly, so the default stopping rule leaves too much error behind.
AcsConfig fd_oracle_config();

struct FdResult {
  bool usable = false;  // partition constant over [lambda - h, lambda + h]
  double worst_rel = 0.0;
  Vector analytic, numeric;
};

// Plugin rhs (mapped to full parameters) against central differences of ACS
// solutions at lambda +- h. ACS at lambda starts from `start`; the two
// neighbours start from that solution. Components below 1e-6 in both are
// skipped.
FdResult rhs_vs_fd(std::shared_ptr<const Problem> pb, const SpRegularizer& reg, double lambda, const Vector& start,
                   double h = 1e-4, const AcsConfig& cfg = fd_oracle_config(), double rhs_scale = 1.0);

}  // namespace agepath

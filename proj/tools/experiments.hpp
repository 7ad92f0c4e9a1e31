#pragma once

#include <string>

#include "cclab/serialize.hpp"

namespace cclab {

struct ExperimentOutput {
  Json report;
  std::string trajectories_csv;  // empty when the experiment emits none
  bool pass = false;
};

/// Runs one named experiment from its effective configuration.  Configuration
/// problems throw (the CLI maps them to exit 1); check failures are reported
/// through `pass` (exit 2).
ExperimentOutput run_experiment(const std::string& kind, const Json& config);

/// Fills in defaults and validates shared fields (seed is mandatory for the
/// stochastic kinds).
Json effective_config(const std::string& kind, Json config);

}  // namespace cclab

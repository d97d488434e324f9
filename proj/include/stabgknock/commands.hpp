#pragma once

#include <string>

#include "stabgknock/io.hpp"
#include "stabgknock/types.hpp"

namespace sgk {

// Outcome of one CLI-level command. `result_json` is the versioned result
// document (deterministic given config+seed), `manifest` carries run
// provenance including timestamps, `csv` is filled by simulate only.
struct CommandResult {
  std::string result_json;
  std::string manifest;
  std::string csv;
};

CommandResult command_select(const DesignTriple& data, const ConfigMap& cfg,
                             const std::string& input_digest);
CommandResult command_screen(const DesignTriple& data, const ConfigMap& cfg,
                             const std::string& input_digest);
CommandResult command_knockoff_check(const DesignTriple& data, const ConfigMap& cfg,
                                     const std::string& input_digest);
CommandResult command_simulate(const ConfigMap& cfg);

}  // namespace sgk

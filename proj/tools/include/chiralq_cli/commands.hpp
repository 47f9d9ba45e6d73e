#pragma once

#include <string>
#include <vector>

#include "chiralq_cli/config.hpp"
#include "chiralq_cli/output.hpp"

namespace chiralq::cli {

inline constexpr const char* kVersion = "0.1.0";

// Each command writes its artifacts into `out` and returns a short
// summary that goes into the manifest.
using Command = nlohmann::ordered_json (*)(const RunConfig&, OutputSet&);

nlohmann::ordered_json cmd_polarization(const RunConfig& cfg, OutputSet& out);
nlohmann::ordered_json cmd_bis(const RunConfig& cfg, OutputSet& out);
nlohmann::ordered_json cmd_winding(const RunConfig& cfg, OutputSet& out);
nlohmann::ordered_json cmd_charges(const RunConfig& cfg, OutputSet& out);
nlohmann::ordered_json cmd_transition(const RunConfig& cfg, OutputSet& out);
nlohmann::ordered_json cmd_phase_diagram(const RunConfig& cfg, OutputSet& out);

std::vector<std::string> command_names();
Command find_command(const std::string& name);

// Validates, runs, writes the manifest. Outputs are removed if anything
// throws.
nlohmann::ordered_json run_command(const std::string& name, const RunConfig& cfg);

// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
int exit_code_for(const std::exception& e);

}  // namespace chiralq::cli

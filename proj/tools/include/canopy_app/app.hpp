#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "canopy_app/config.hpp"

namespace canopy::app {

struct CommandOutput {
  std::vector<std::string> files;  // written, in order
  std::string summary;             // human-readable, one item per line
};

CommandOutput cmd_sky(const Config& config);
CommandOutput cmd_trace(const Config& config);
CommandOutput cmd_validate(const Config& config);
CommandOutput cmd_tune(const Config& config);
CommandOutput cmd_ablate(const Config& config);

// Full command line handling. Errors go to `err` as a single line
// `error: <category>: <message>`; returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace canopy::app

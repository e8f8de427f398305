#ifndef RSODC_CLI_COMMANDS_HPP
#define RSODC_CLI_COMMANDS_HPP

namespace rsodc::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitInput = 2 };

/// Parses the command line and dispatches to fit / tune / select-k / simulate / evaluate.
int run(int argc, char** argv);

}  // namespace rsodc::cli

#endif

#pragma once

// The `spine` command line: backbone, synth and study subcommands.

#include <iosfwd>
#include <string>
#include <vector>

namespace spine::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,              // bad flags or unreadable / malformed input
    kModelFailure = 3,       // the model or study could not produce a result
    kGenerationFailure = 4,  // synthetic graph generation failed
};

// Arguments exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spine::cli

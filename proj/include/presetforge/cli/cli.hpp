#pragma once

#include <string>
#include <vector>

namespace presetforge::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kDataError = 2,
    kRuntimeError = 3,
};

/// Entry point of the `preset` binary; argv[0] is the program name.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace presetforge::cli

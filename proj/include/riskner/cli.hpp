#pragma once

namespace riskner::cli {

/// Runs one command. Returns 0 on success, 1 on operational failure, 2 on
/// usage errors. Never throws; never prints stack traces.
int run(int argc, const char* const* argv);

}  // namespace riskner::cli

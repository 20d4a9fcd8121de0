#pragma once

namespace locq::cli {

/// Command-line entry point. Exit codes: 0 success, 1 acceptance-threshold
/// failure, 2 usage or parse error, 3 resource/budget error.
int run(int argc, const char* const* argv);

} // namespace locq::cli

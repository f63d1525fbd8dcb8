#pragma once

#include <iosfwd>

namespace circlaw {

/// Entry point of the `circlaw` tool. Exit codes: 0 success, 1 usage or
/// configuration error, 2 runtime failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace circlaw

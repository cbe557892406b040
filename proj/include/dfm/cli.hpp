#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dfm {

/// Entry point of the `dfmscore` tool. Returns 0 when every gated rule
/// passes, 2 on a sign-off failure and 1 on usage or input errors.
int run_cli(int argc, char** argv);

/// Same, with explicit arguments (excluding the program name) and streams.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dfm

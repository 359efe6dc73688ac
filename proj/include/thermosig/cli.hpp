#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thermosig {

/// Exit codes: 0 success, 1 bad input or usage, 2 internal failure.
int cli_main(int argc, char** argv);
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermosig

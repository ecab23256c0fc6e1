#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace imdev::cli {

// Exit codes: 0 success, 1 domain error, 2 configuration or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitConfig = 2;

int run(int argc, char** argv);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace imdev::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace medtest::cli {

// Entry point of the medtest tool. args excludes the program name. Returns
// the process exit code: 0 success, 1 usage/config, 2 data/validation,
// 3 estimation infeasible.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

// Flat "key = value" lines, '#' comments. Keys are returned with '.' and '_'
// mapped to '-' so they name the corresponding long flag.
std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text);

}  // namespace medtest::cli

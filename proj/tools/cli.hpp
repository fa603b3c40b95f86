#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace speech3d::cli {

// 0 ok, 1 other failure, 2 config or usage, 3 not found, 4 backend failure.
enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kNotFound = 3, kBackend = 4 };

int exit_code_for(const std::exception& e);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace speech3d::cli

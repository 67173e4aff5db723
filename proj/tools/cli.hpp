#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace leinert::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kBudget = 3 };

/// Runs one subcommand. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

std::string sha256_hex(const std::string& bytes);

}  // namespace leinert::cli

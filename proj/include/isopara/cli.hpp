#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace isopara::cli {

/// Runs one subcommand; args exclude the program name.
/// Returns 0 on success, 1 on failed verification or computation errors,
/// 2 on parse or schema errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace isopara::cli

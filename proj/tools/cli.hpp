// SPDX-License-Identifier: Apache-2.0
//
// The `bp` command line as a callable function so tests can drive it
// in-process.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bp::cli {

/// Runs one invocation. `args` excludes the program name. Returns the
/// process exit code: 0 ok, 2 usage, 3 data validation, 4 numeric failure,
/// 5 statistical degeneracy.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bp::cli

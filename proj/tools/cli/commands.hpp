#pragma once

#include <iosfwd>

namespace ibo::cli {

/// Entry point of the `ibo` command. Returns the process exit code: 0 on
/// success, 1 for usage or runtime errors, 2 for unparseable input files.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ibo::cli

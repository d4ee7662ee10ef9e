#pragma once

#include <ostream>

namespace lorenz::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one subcommand. Returns 0 on success, 1 when the computation fails
/// and 2 on usage or validation errors. manifest.json is written last and
/// only on success.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lorenz::cli

#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "wmh/error.hpp"

namespace wmh::cli {

/// 0 success, 1 computation degeneracy, 2 input/IO/shape/argument error, 3 format error.
int exit_code_for(ErrorCategory category) noexcept;

/// Runs `wmhq` with `args` (program name excluded). Reports go to `out`, diagnostics to `err`.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace wmh::cli

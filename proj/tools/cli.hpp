// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wsloc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitPipelineState = 3;
inline constexpr int kExitInternal = 4;

// Runs the command line `args` (without the program name). Machine-readable
// output goes to `out`, logs and error messages to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace wsloc::cli

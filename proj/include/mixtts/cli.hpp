// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#pragma once

#include <ostream>

namespace mixtts::cli {

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Entry point for the `mixtts` binary. Normal output goes to `out`,
/// diagnostics and the resolved configuration to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mixtts::cli

// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>

namespace rilab {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,        // bad flags or unreadable/invalid input
  kExitCalibration = 3,  // calibration record does not cover the model
  kExitContract = 4,     // operation not allowed for this model (e.g. cfqp on a clipped model)
};

// Entry point of the `rilab` tool. Reports go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rilab

#pragma once

#include <iosfwd>

namespace iekf {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitNumerical = 2,
  kExitCheckFailed = 3,
};

/// Entry point of the iekf tool, with the streams injectable for tests.
///
///   iekf run <config>... [--out dir] [--seed n] [--noise on|off] [--jobs n]
///   iekf check --model car|nav [--landmarks "x y; x y"]
///   iekf observability <config> [--window n]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace iekf

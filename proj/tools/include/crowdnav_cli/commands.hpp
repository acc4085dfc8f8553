#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdnav::app {

/// Bad flag values or missing inputs; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point shared by the executable and the tests. args[0] is the
/// program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Directory holding the bundled case scenarios.
std::string bundled_scenario_dir();

}  // namespace crowdnav::app

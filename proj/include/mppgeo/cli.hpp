#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "mppgeo/integrators.hpp"

namespace mppgeo::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kIntegrationError = 3, kSolverError = 4 };

/// Malformed, incomplete or unknown configuration content.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<Scheme> scheme;
};

/// Runs one of mpp, sweep, shoot, landmarks, estimate. Artifacts go to
/// `out_dir`; failures are reported on `err` as a single JSON object.
int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
        const Overrides& overrides, std::ostream& err);

}  // namespace mppgeo::cli

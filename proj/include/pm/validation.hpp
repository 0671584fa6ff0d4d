#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pm {

struct ValidationOptions {
  std::uint64_t seed = 20240601;
  std::uint64_t samples_per_row = 1000000;
  bool inject_sign_error = false;  // flips the M-sample acceptance ratio
};

struct ValidationCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Oracle suite: detailed balance on the discrete toy, Gaussian moment and
/// marginal-ratio checks, MH stationarity on a one-site bridge.
std::vector<ValidationCheck> run_validation(const ValidationOptions& opts);

}  // namespace pm

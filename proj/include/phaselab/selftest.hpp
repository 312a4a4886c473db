#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "phaselab/adapters.hpp"

namespace phaselab {

// Fast property checks against the reference implementations. Prints one
// line per check and returns the number of failures.
int run_selftest(std::ostream& out);

struct GradCheckResult {
  std::size_t entries = 0;  // parameter entries compared
  double worst_abs = 0.0;   // |analytic - numeric| at the worst entry
  double worst_rel = 0.0;   // relative error at the worst entry
  std::string worst_entry;  // "<tensor>[i]"
  bool ok = true;           // every entry within max(1e-4 relative, 1e-6 absolute)
};

// Compares tape gradients of the mean BCE loss (adapter + head) against
// central differences with step 1e-5, on a small random instance
// (d_in = 8, d_out = 6, batch 5, r = 4). A_up is randomized so every tensor
// receives signal.
GradCheckResult check_adapter_gradients(const adapters::Variant& variant,
                                        const adapters::AdapterOptions& options,
                                        std::uint64_t seed);

}  // namespace phaselab

#pragma once

#include <iosfwd>

namespace phaselab::cli {

// Runs one subcommand: gen-data, train, protocol, ablate, bench, embed,
// selftest. Returns 0 on success, 1 on any runtime error and 2 on usage errors.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phaselab::cli

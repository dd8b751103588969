#pragma once

#include <iosfwd>

namespace tomsc::exp {

/// Quick invariant suite (probability, belief, policy, channel and gradient
/// properties). Prints one line per check; true when all pass.
bool run_selftest(std::ostream& log);

}  // namespace tomsc::exp

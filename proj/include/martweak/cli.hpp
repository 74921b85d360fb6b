#pragma once

#include <ostream>

namespace martweak {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one command line.  Returns 0 on success, 1 on domain errors or a
/// failed verification, 2 on usage errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace martweak

#pragma once

#include <stdexcept>

namespace ipp {

// A required input file or directory is absent; maps to its own CLI exit
// code so callers can distinguish it from runtime failures.
struct MissingArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ipp

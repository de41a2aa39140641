#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

// Malformed or unreadable inputs, bad configuration. CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested computation has no admissible result under the given
// parameters (generator rejection cap, mining guard). CLI exit code 1.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cascade

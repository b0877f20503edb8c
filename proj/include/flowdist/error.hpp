#pragma once

#include <stdexcept>
#include <string>

namespace flowdist {

/// Malformed input or a violated precondition (bad file, parameter out of
/// range, disconnected graph for an irreducible distance, ...).
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed: eigensolver breakdown, singular system,
/// iteration cap reached.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace flowdist

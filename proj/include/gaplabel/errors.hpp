#pragma once

#include <stdexcept>
#include <string>

namespace gaplabel {

/// Backward iteration or a whole-line operator was requested for a map with
/// no inverse (the circle doubling map only supports half-line operators).
class NonInvertibleSystem : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A solenoid point does not carry enough 2-adic digits or backward angles.
class InsufficientHistory : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// Phase unwrapping could not decide the integer part of an increment.
class UnwrapAmbiguity : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An observable does not fit the system it is evaluated on.
class InvalidObservable : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace gaplabel

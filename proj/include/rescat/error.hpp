#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rescat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A stepper produced a non-finite state.
class IntegrationDiverged : public Error {
 public:
  IntegrationDiverged(std::size_t step, double t);

  std::size_t step() const noexcept { return step_; }
  double time() const noexcept { return t_; }

 private:
  std::size_t step_;
  double t_;
};

/// The harmonic data holds no multiple of the requested n1.
class NoResonantHarmonics : public Error {
 public:
  using Error::Error;
};

/// omega' vanishes at the crossing; the stationary-phase formula does not apply.
class DegenerateCrossing : public Error {
 public:
  using Error::Error;
};

class NonMonotoneFrequency : public Error {
 public:
  using Error::Error;
};

/// Another located resonance falls inside a measurement window.
class OverlappingResonance : public Error {
 public:
  OverlappingResonance(int n1, int n2, double t_star);

  int intruder_n1() const noexcept { return n1_; }
  int intruder_n2() const noexcept { return n2_; }
  double intruder_time() const noexcept { return t_star_; }

 private:
  int n1_;
  int n2_;
  double t_star_;
};

/// A requested time lies outside the trajectory.
class OutOfSpan : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rescat

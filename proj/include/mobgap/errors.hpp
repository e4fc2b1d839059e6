#pragma once

#include <stdexcept>
#include <string>

namespace mobgap {

/// Malformed or inconsistent configuration text (unknown key, bad value, missing key).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a trustworthy answer.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Fermi energy sits on an eigenvalue, so the step function is discontinuous there.
class EigenvalueCollision : public NumericError {
 public:
  EigenvalueCollision(double energy, double eigenvalue)
      : NumericError("Fermi energy " + std::to_string(energy) + " collides with eigenvalue " +
                     std::to_string(eigenvalue)),
        energy_(energy),
        eigenvalue_(eigenvalue) {}

  double energy() const { return energy_; }
  double eigenvalue() const { return eigenvalue_; }

 private:
  double energy_;
  double eigenvalue_;
};

}  // namespace mobgap

#pragma once

#include <stdexcept>
#include <string>

namespace ampse {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad shapes, out-of-domain parameters, invalid configuration.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Gauss-Hermite estimates at two node counts disagree beyond tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double coarse, double fine)
      : Error(what), coarse_(coarse), fine_(fine) {}
  double coarse() const { return coarse_; }
  double fine() const { return fine_; }

 private:
  double coarse_;
  double fine_;
};

/// An iteration produced a non-finite or exploding value.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

}  // namespace ampse

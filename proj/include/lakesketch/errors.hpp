#pragma once

#include <stdexcept>
#include <string>

namespace lakesketch {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A CSV file with no columns at all (empty file).
class ZeroColumnsError : public Error {
 public:
  using Error::Error;
};

/// Two sketches or signatures that cannot be compared.
class IncompatibleSketchError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or parameter.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace lakesketch

#pragma once

#include <stdexcept>
#include <string>

namespace a2f {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent attribute schema / attribute vector.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Unreadable or inconsistent dataset content (images, annotations, manifests).
class DataError : public Error {
 public:
  using Error::Error;
};

// The face detector found nothing to crop.
class NoFaceDetected : public DataError {
 public:
  using DataError::DataError;
};

// Tensor shape or length does not match the expected contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Missing, corrupted or incompatible checkpoint.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Loss became non-finite during optimization.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value or conflicting options.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace a2f

#pragma once

#include <stdexcept>
#include <string>

namespace ctrtab {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can map failure classes onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or width disagreement between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A numeric argument outside its documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (CSV, schema, tables).
class DataError : public Error {
 public:
  using Error::Error;
};

// Corrupt or incompatible on-disk artifact (checkpoints, reports).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A required upstream artifact is missing (e.g. control training without a
// trained denoiser).
class PrerequisiteError : public Error {
 public:
  using Error::Error;
};

// Training or sampling hit a non-finite value or a broken invariant.
class TrainingAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace ctrtab

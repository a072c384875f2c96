#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace geolink {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A geometry violates a structural invariant (too few points, open ring, zero area).
class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

/// The relate kernel cannot resolve the configuration of a pair.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class IoFailure : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// Invalid user configuration; maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class MemoryBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class WorkerFailure : public Error {
 public:
  WorkerFailure(std::size_t partition, const std::string& what)
      : Error("partition " + std::to_string(partition) + ": " + what),
        partition_(partition) {}

  std::size_t partition() const noexcept { return partition_; }

 private:
  std::size_t partition_;
};

}  // namespace geolink

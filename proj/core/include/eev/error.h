#pragma once

#include <stdexcept>
#include <string>

namespace eev {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input (files, flags, network structure).
// `path` names the offending field, e.g. "exits[0].threshold".
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// A soundness check inside the engine failed. Always a bug.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace eev

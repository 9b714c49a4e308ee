#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace advis {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class FormatError : public Error {
public:
  using Error::Error;
};

class SizeMismatchError : public Error {
public:
  using Error::Error;
};

/// Raised when a payload contains NaN or Inf; carries the flat index of the first one.
class NonFiniteError : public Error {
public:
  NonFiniteError(std::size_t index, const std::string& what)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

class DisconnectedGraphError : public Error {
public:
  DisconnectedGraphError(std::size_t components, const std::string& what)
      : Error(what), components_(components) {}
  std::size_t components() const noexcept { return components_; }

private:
  std::size_t components_;
};

class RankDeficientError : public Error {
public:
  using Error::Error;
};

} // namespace advis

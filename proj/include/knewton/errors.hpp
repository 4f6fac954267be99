#pragma once

#include <stdexcept>
#include <string>

namespace knewton {

// Base for everything thrown by the library. Callers that want a single
// catch point use this; tests target the concrete types.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct NotPositiveDefinite : Error {
  using Error::Error;
};
struct NotSymmetric : Error {
  using Error::Error;
};
struct NonFiniteInput : Error {
  using Error::Error;
};
struct NonFiniteResult : Error {
  using Error::Error;
};
struct NonFiniteEncountered : Error {
  using Error::Error;
};
struct Stagnation : Error {
  using Error::Error;
};
struct IndexOutOfRange : Error {
  using Error::Error;
};
struct DuplicateIndex : Error {
  using Error::Error;
};
struct ArgumentOutOfRange : Error {
  using Error::Error;
};
struct NotDescentDirection : Error {
  using Error::Error;
};
struct MaxBacktracksExceeded : Error {
  using Error::Error;
};
struct IteratesNotRecorded : Error {
  using Error::Error;
};

// data loading
struct ParseError : Error {
  using Error::Error;
};
struct MoreThanTwoClasses : Error {
  using Error::Error;
};
struct RaggedRows : Error {
  using Error::Error;
};
struct TooFewRows : Error {
  using Error::Error;
};

// cli / config
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace knewton

#pragma once

#include <stdexcept>
#include <string>

namespace corrspec {

// Every failure raised by the library derives from Error so callers (and the
// C shim) can catch one type and still dispatch on the concrete kind.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Argument outside the documented domain of an operation.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// A configuration that cannot carry any frequency information (zero contrast).
class Unmeasurable : public Error {
public:
  using Error::Error;
};

// A detection model whose likelihoods cannot explain an observation.
class ModelMisconfigured : public Error {
public:
  using Error::Error;
};

namespace detail {
[[noreturn]] inline void fail(const std::string &what) { throw InvalidArgument(what); }
inline void require(bool ok, const char *what) {
  if (!ok)
    fail(what);
}
} // namespace detail

} // namespace corrspec

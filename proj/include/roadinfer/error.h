#ifndef ROADINFER_ERROR_H_
#define ROADINFER_ERROR_H_

#include <stdexcept>
#include <string>

namespace roadinfer {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A node, edge, or key lookup failed.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A file was readable but its contents are malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

// An internal consistency check failed. Indicates a bug, not bad input.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace roadinfer

#endif  // ROADINFER_ERROR_H_

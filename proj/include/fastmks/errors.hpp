#pragma once

#include <stdexcept>
#include <string>

namespace fastmks {

// Base class for every recoverable failure in the library, so the CLI and the
// python layer can catch one type at the boundary.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad parameters: unknown kernel names, k > n, tau >= n, malformed specs.
class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

// Kernel applied outside its domain (cosine of a zero vector, vector kernel on
// strings or vice versa).
class KernelDomainError : public Error {
 public:
  explicit KernelDomainError(const std::string& msg) : Error(msg) {}
};

// Induced-distance radicand fell below -1e-9: the kernel is not positive
// semidefinite on this data and no metric exists.
class NotPositiveSemidefinite : public Error {
 public:
  explicit NotPositiveSemidefinite(const std::string& msg) : Error(msg) {}
};

// Malformed dataset files; message carries the offending row where known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Index file unreadable, wrong version, or fingerprint/kernel mismatch with
// the dataset supplied at load time.
class IndexFormatError : public Error {
 public:
  explicit IndexFormatError(const std::string& msg) : Error(msg) {}
};

}  // namespace fastmks

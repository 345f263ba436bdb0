#pragma once

#include <stdexcept>
#include <string>

namespace sewmimic {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A vector that must be normalized (or a cross product that must be
/// nonzero) fell below the degeneracy tolerance.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Malformed input file or message.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A loaded object violates one of its structural invariants.
class InvariantError : public Error {
public:
    using Error::Error;
};

}  // namespace sewmimic

#pragma once

#include <stdexcept>
#include <string>

namespace labelqa {

/// Base for every error raised by the toolkit. Callers that only need to
/// distinguish validation from I/O failures can catch this and ask `is_io()`.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual bool is_io() const noexcept { return false; }
};

/// A precondition on values was violated (non-binary mask, probability
/// outside [0,1], threshold out of range, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Two grids that must share geometry do not.
class AlignmentError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
    bool is_io() const noexcept override { return true; }
};

}  // namespace labelqa

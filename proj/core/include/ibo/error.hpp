#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ibo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class MoveAfterRoundOver : public Error {
public:
    MoveAfterRoundOver() : Error("move submitted after the round is over") {}
};

class DegenerateMove : public Error {
public:
    using Error::Error;
};

class IncompleteRound : public Error {
public:
    IncompleteRound() : Error("round is not complete") {}
};

class SingularUpdate : public Error {
public:
    using Error::Error;
};

class EmptyObservations : public Error {
public:
    EmptyObservations() : Error("observation set is empty") {}
};

class TooFewObservations : public Error {
public:
    using Error::Error;
};

class CollinearMoves : public Error {
public:
    CollinearMoves() : Error("moves 0-2 are collinear; orthogonal gradient is unidentified") {}
};

/// Malformed input file. `line()` is 1-based and counts the header.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace ibo

#pragma once

#include <stdexcept>
#include <string>

namespace padam {

/// Loss, gradient, or parameter value stopped being finite. index() is the
/// offending component (or -1 when the scalar loss itself is non-finite).
class NonFiniteError : public std::runtime_error {
public:
    NonFiniteError(const std::string& what, long index = -1)
        : std::runtime_error(what), index_(index) {}
    long index() const { return index_; }

private:
    long index_;
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ScheduleDomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SelectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateReferenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace padam

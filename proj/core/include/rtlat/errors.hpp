#pragma once

#include <stdexcept>
#include <string>

namespace rtlat {

// Integer time arithmetic left the representable range.
class ArithmeticRangeError : public std::range_error {
public:
    explicit ArithmeticRangeError(const std::string& what) : std::range_error(what) {}
};

// A domain type's invariant was violated (names the offending field/inequality).
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// RT privileges (priority/affinity) were refused and strict mode is on.
class PrivilegeError : public std::runtime_error {
public:
    explicit PrivilegeError(const std::string& what) : std::runtime_error(what) {}
};

// A sample file failed its integrity check.
class CorruptFileError : public std::runtime_error {
public:
    explicit CorruptFileError(const std::string& what) : std::runtime_error(what) {}
};

// A statistic was requested over an empty series.
class EmptyInputError : public std::invalid_argument {
public:
    explicit EmptyInputError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace rtlat

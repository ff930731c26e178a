#pragma once

#include <stdexcept>
#include <string>

namespace dlsh {

/// Invalid configuration value (bad k, W, c, empty grid, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A vector whose length does not match the dimension it is used with.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside a function's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Unreadable, unwritable, truncated or malformed file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A message arrived at a reducer it should never have been routed to,
/// or some other internal accounting invariant broke.
class IntegrityError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace dlsh

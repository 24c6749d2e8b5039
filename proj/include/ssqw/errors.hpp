#pragma once

#include <stdexcept>
#include <string>

namespace ssqw {

// The requested target puts (essentially) no probability mass inside its domain.
class unrepresentable_target : public std::runtime_error {
public:
    explicit unrepresentable_target(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file (CSV or JSON).
class format_error : public std::runtime_error {
public:
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ssqw

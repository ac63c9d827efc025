#pragma once

#include <stdexcept>
#include <string>

namespace vicomm {

// Precondition / shape violations: caller passed something structurally wrong.
class contract_error : public std::logic_error {
public:
    explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

// Bad or missing configuration (CLI exit code 2).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Numeric failure at runtime: non-finite values, diverged training (CLI exit code 3).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Channel estimate too small to invert; callers may treat the block as an erasure.
class degenerate_estimate_error : public numeric_error {
public:
    explicit degenerate_estimate_error(const std::string& what) : numeric_error(what) {}
};

} // namespace vicomm

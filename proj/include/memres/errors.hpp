#pragma once

#include <stdexcept>
#include <string>

namespace memres {

// Thrown when an iterative scheme or quadrature fails to reach its tolerance.
class accuracy_error : public std::runtime_error {
public:
    explicit accuracy_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on malformed configuration (CLI, operator build, grid specs).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an inverse-transform contour hits a pole or a zero of the symbol.
class contour_error : public std::runtime_error {
public:
    explicit contour_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace memres

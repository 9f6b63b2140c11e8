#pragma once

#include <stdexcept>
#include <string>

namespace pipesim {

// Invalid model/cluster/config description or inconsistent run spec.
class SpecError : public std::runtime_error {
public:
    explicit SpecError(const std::string& msg) : std::runtime_error(msg) {}
};

// Simulator failure (malformed task program, dependency deadlock).
class SimError : public std::runtime_error {
public:
    explicit SimError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace pipesim

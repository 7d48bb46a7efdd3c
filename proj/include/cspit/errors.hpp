#pragma once

#include <stdexcept>
#include <string>

namespace cspit {

// A numerical routine failed to converge or produced an out-of-contract value.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Scenario/config file rejected; message names the offending field.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cspit

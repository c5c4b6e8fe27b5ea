#pragma once

#include <stdexcept>
#include <string>

namespace fedsim {

/// Bad static configuration (dimensions, window sizes, file keys).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad runtime input (mismatched shapes, empty datasets, invalid ids).
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace fedsim

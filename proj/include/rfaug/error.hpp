// rfaug/error.hpp
//
// Exception types shared by every module. ConfigError marks bad input or
// configuration (the CLI maps it to exit code 2); Error marks a failure that
// happened while doing the work (exit code 3).

#pragma once

#include <stdexcept>
#include <string>

namespace rfaug {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace rfaug

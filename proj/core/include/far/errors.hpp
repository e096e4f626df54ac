#pragma once
#include <stdexcept>
#include <string>

namespace far {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed data: unreadable CSV, inconsistent grids, non-finite values.
struct InputError : Error {
    using Error::Error;
};

// Invalid configuration: bad dimensions, impossible tuning rules, bad flags.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace far

#pragma once

#include <stdexcept>
#include <string>

namespace netscope {

/// Malformed or inconsistent input (bad files, shape mismatches, violated
/// preconditions). The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation produced non-finite values or failed to converge to a
/// feasible answer. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace netscope

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace covert {

/// Bad user-facing input: out-of-range parameter, non-finite value.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The parameter point admits no covert operation (empty Q_c range,
/// threshold bracket pole, ...). Callers usually map this to CR = 0.
class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A closed form produced a value outside its guard band, or a
/// root-finder/quadrature failed to converge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace covert

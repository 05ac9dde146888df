#pragma once

#include <stdexcept>

namespace pcu {

// Tensor operand shapes are incompatible; the message names the op and both shapes.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// All points of a patch coincide, so it has no scale to normalize by.
struct DegeneratePatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A function handed to grad_check returned different values on two forward passes.
struct DeterminismError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite value where the computation cannot continue (NaN gradient, diverged loss).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pcu

// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace pcdn {

// Bad arguments or inputs violating a documented precondition.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Tensor shape mismatch; message carries both shapes.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// NaN/Inf encountered, negative sqrt argument, diverging loss.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A point index was not covered by any patch during stitching.
struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; message carries the line number.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem failure (unwritable path, missing file).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested feature has no implementation for the given inputs.
struct Unsupported : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pcdn

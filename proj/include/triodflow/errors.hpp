#pragma once

#include <stdexcept>
#include <string>

namespace triodflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// anisotropy
struct NotElliptic : Error {
    using Error::Error;
};
struct ZeroVector : Error {
    using Error::Error;
};

// curves / networks
struct Degenerate : Error {
    using Error::Error;
};
struct DegenerateJunction : Error {
    using Error::Error;
};

// reparam
struct SpecViolation : Error {
    using Error::Error;
};
struct GeometricObstruction : Error {
    using Error::Error;
};

// diagnostics
struct FitDegenerate : Error {
    using Error::Error;
};
struct NoConvergence : Error {
    using Error::Error;
};

// flow
struct SolverFailure : Error {
    using Error::Error;
};

// cli_io
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

} // namespace triodflow

#pragma once

#include <stdexcept>
#include <string>

namespace msens {

// Base class so callers (the CLI in particular) can catch everything the
// library throws with a single handler.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// CSV is missing a required column or has an inconsistent header.
struct SchemaError : Error {
    using Error::Error;
};

// A cell failed to parse as a finite number.
struct ParseError : Error {
    using Error::Error;
};

// Data violates a documented invariant (treatment outside {0,1}, ...).
struct ValidationError : Error {
    using Error::Error;
};

// Bad analysis configuration (fold count, grids, levels).
struct ConfigError : Error {
    using Error::Error;
};

// Model fitting failed (separation, singular design, degenerate folds).
struct FitError : Error {
    using Error::Error;
};

// Query falls outside the support of the fitted conditional model.
struct ExtrapolationError : Error {
    using Error::Error;
};

// Mathematical-domain violation (gamma <= 1, lambda <= 0, psi1 < 1, ...).
struct DomainError : Error {
    using Error::Error;
};

// The hypothesized outcome shift cannot be met on the fitted support.
struct InfeasibleTargetError : Error {
    using Error::Error;
};

// Every grid point has zero standard error; bootstrap is undefined.
struct DegenerateGridError : Error {
    using Error::Error;
};

}  // namespace msens

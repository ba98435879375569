#pragma once

#include <stdexcept>
#include <string>

namespace apf {

// Base class for all library-defined failures.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every weight in a sample is zero (or -inf on log scale). Signals filter
// degeneracy; the caller aborts the replication and records it.
class AllWeightsZero : public Error {
public:
    AllWeightsZero() : Error("all weights are zero") {}
};

// Grid bounds too tight: boundary density is not negligible.
class GridTooNarrow : public Error {
public:
    using Error::Error;
};

// Refining a quadrature rule moved the result by more than the tolerance.
class QuadratureNotConverged : public Error {
public:
    using Error::Error;
};

// A first-stage weight evaluated to NaN, +inf, or a nonpositive value where
// strict positivity is required.
class NonpositiveFirstStageWeight : public Error {
public:
    using Error::Error;
};

// Target function is (numerically) constant under the relevant measure, so
// the optimal-weight integrand vanishes everywhere.
class DegenerateTarget : public Error {
public:
    using Error::Error;
};

// A filter replication hit AllWeightsZero at some step.
class ReplicationDegenerate : public Error {
public:
    explicit ReplicationDegenerate(int step)
        : Error("replication degenerate at step " + std::to_string(step)),
          step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

// Bad experiment or CLI configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace apf

#pragma once

#include <stdexcept>
#include <string>

namespace fch {

/// Base class for every error raised by the library. `exit_code()` maps the
/// failure class onto the CLI exit-code taxonomy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual int exit_code() const noexcept { return 1; }
};

/// Invalid user input: bad ranges, malformed config files, unknown keys.
class ConfigError : public Error {
public:
    using Error::Error;
    [[nodiscard]] int exit_code() const noexcept override { return 2; }
};

/// A file the command depends on was not produced by an earlier run.
class MissingInputError : public Error {
public:
    using Error::Error;
    [[nodiscard]] int exit_code() const noexcept override { return 3; }
};

/// Nonlinear or eigen solver failed to converge, or a Jacobian was singular.
class SolverError : public Error {
public:
    using Error::Error;
    [[nodiscard]] int exit_code() const noexcept override { return 4; }
};

class NewtonDivergence : public SolverError {
public:
    using SolverError::SolverError;
};

class JacobianSingular : public SolverError {
public:
    using SolverError::SolverError;
};

/// An energy-dissipation certificate (or a verification check) failed.
class CertificateViolation : public Error {
public:
    using Error::Error;
    [[nodiscard]] int exit_code() const noexcept override { return 5; }
};

/// Non-finite quadrature values, overflow in the potential, indefinite
/// stiffness factorizations.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace fch

// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file error.hpp
 * @brief Exception hierarchy shared by every module.
 *
 * Each exception carries a category so that drivers can translate failures
 * into process exit codes without string matching.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace pigen {

enum class ErrorKind {
    Config,       ///< invalid user input or parameter
    Io,           ///< unreadable / unwritable file
    Format,       ///< malformed text input
    Numerical,    ///< degenerate denominators, failed solves
    Convergence,  ///< iteration cap reached
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& what) : Error(ErrorKind::Format, what) {}
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// Davidson ran out of iterations; the last residual norm is kept for reporting.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& what, double residual)
        : Error(ErrorKind::Convergence, what), last_residual(residual) {}
    double last_residual;
};

} // namespace pigen

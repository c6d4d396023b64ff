// error.hpp — Error type shared by every simulator module

#pragma once

#include <stdexcept>
#include <string>

namespace surrogate {

enum class ErrorCode {
    invalid_spectrum,
    invalid_mode,
    invalid_pair,
    shape_mismatch,
    unsupported_excitation,
    unsupported_variant,
    invalid_coupling,
    invalid_argument,
    step_failure,
    no_convergence,
    config_error,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace surrogate

#pragma once

#include <stdexcept>
#include <string>

namespace sitn {

/// Error categories. Each category maps to a stable CLI exit code so scripted
/// callers can distinguish failure classes without parsing messages.
enum class errc {
    invalid_input = 1,        // non-finite values, bad dimensions, bad arguments
    bad_format,               // wrong magic / version / structural schema violation
    corrupt_data,             // header inconsistent with payload, truncation, overflow
    insufficient_data,        // too few samples for the requested fit
    configuration,            // unknown names, inconsistent settings
    solver_failure,           // step limit exhausted / step size underflow
    nonfinite_state,          // ODE state or loss left the finite domain
    training_diverged,        // non-finite training loss
    degenerate_spectrum,      // no spectral mass in the retained bins
    degenerate_kde,           // zero-variance sample, no bandwidth
    unsupported_dimension,    // above the exact-divergence likelihood cap
    io_failure,               // filesystem-level read/write failure
};

/// Short stable identifier, e.g. "invalid-input"; used in CLI diagnostics.
const char* errc_name(errc code) noexcept;

/// Process exit code for the category (0 is success, 1 is unexpected).
int errc_exit_code(errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

/// Throws Error{code} with the given message.
[[noreturn]] void raise(errc code, const std::string& message);

/// Throws Error{errc::invalid_input} unless `condition`.
void require(bool condition, errc code, const std::string& message);

}  // namespace sitn

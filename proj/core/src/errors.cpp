#include "sitn/errors.hpp"

namespace sitn {

const char* errc_name(errc code) noexcept {
    switch (code) {
        case errc::invalid_input: return "invalid-input";
        case errc::bad_format: return "bad-format";
        case errc::corrupt_data: return "corrupt-data";
        case errc::insufficient_data: return "insufficient-data";
        case errc::configuration: return "configuration";
        case errc::solver_failure: return "solver-failure";
        case errc::nonfinite_state: return "nonfinite-state";
        case errc::training_diverged: return "training-diverged";
        case errc::degenerate_spectrum: return "degenerate-spectrum";
        case errc::degenerate_kde: return "degenerate-kde";
        case errc::unsupported_dimension: return "unsupported-dimension";
        case errc::io_failure: return "io-failure";
    }
    return "unknown";
}

int errc_exit_code(errc code) noexcept {
    // 0 = success, 1 = unexpected exception, 2 = argument parsing; library
    // categories follow.
    return 2 + static_cast<int>(code);
}

void raise(errc code, const std::string& message) {
    throw Error(code, message);
}

void require(bool condition, errc code, const std::string& message) {
    if (!condition) raise(code, message);
}

}  // namespace sitn

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sitn {

enum class OdeMethod {
    dopri45,  // adaptive Dormand-Prince 5(4), PI step-size control
    rk4,      // classic fixed-step fourth-order Runge-Kutta
};

struct SolverConfig {
    OdeMethod method = OdeMethod::dopri45;
    double atol = 1e-5;
    double rtol = 1e-5;
    std::size_t max_steps = 100000;  // adaptive: accepted-step budget
    std::size_t fixed_steps = 100;   // rk4: number of equal steps

    /// Throws errc::configuration on non-positive tolerances / step counts.
    void validate() const;
};

/// dy/dt = f(t, y): reads `y`, writes dy/dt into `dydt` (same length).
using OdeRhs = std::function<void(double t, std::span<const double> y,
                                  std::span<double> dydt)>;

struct OdeResult {
    std::vector<double> state;
    std::size_t steps = 0;      // accepted steps (rk4: fixed_steps)
    std::size_t rhs_evals = 0;  // total right-hand-side evaluations
};

/// Integrates dy/dt = f(t, y) from (t0, y0) to t1. t1 < t0 integrates
/// backwards. t1 == t0 returns y0 untouched.
///
/// Errors: errc::solver_failure when the adaptive controller exhausts
/// max_steps or the step size underflows; errc::nonfinite_state when the
/// state or a stage derivative becomes non-finite.
OdeResult integrate_ode(const OdeRhs& rhs, std::span<const double> y0,
                        double t0, double t1, const SolverConfig& config);

}  // namespace sitn

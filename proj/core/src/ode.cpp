#include "sitn/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sitn/errors.hpp"

namespace sitn {

void SolverConfig::validate() const {
    require(std::isfinite(atol) && atol > 0.0, errc::configuration,
            "solver: atol must be positive");
    require(std::isfinite(rtol) && rtol > 0.0, errc::configuration,
            "solver: rtol must be positive");
    require(max_steps > 0, errc::configuration,
            "solver: max_steps must be positive");
    require(fixed_steps > 0, errc::configuration,
            "solver: fixed_steps must be positive");
}

namespace {

void check_finite(std::span<const double> y, const char* what) {
    for (double v : y) {
        if (!std::isfinite(v)) {
            raise(errc::nonfinite_state,
                  std::string("solver: ") + what + " left the finite domain");
        }
    }
}

OdeResult integrate_rk4(const OdeRhs& rhs, std::span<const double> y0,
                        double t0, double t1, const SolverConfig& config) {
    const std::size_t n = y0.size();
    OdeResult res;
    res.state.assign(y0.begin(), y0.end());
    const double h = (t1 - t0) / static_cast<double>(config.fixed_steps);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    double t = t0;
    for (std::size_t s = 0; s < config.fixed_steps; ++s) {
        auto& y = res.state;
        rhs(t, y, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        rhs(t + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        rhs(t + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
        rhs(t + h, tmp, k4);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        res.rhs_evals += 4;
        t = t0 + h * static_cast<double>(s + 1);
        check_finite(y, "state");
    }
    res.steps = config.fixed_steps;
    return res;
}

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,      0.0,        500.0 / 1113,
                           125.0 / 192,     -2187.0 / 6784,
                           11.0 / 84,       0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,        7571.0 / 16695,
                           393.0 / 640,     -92097.0 / 339200,
                           187.0 / 2100,    1.0 / 40};

OdeResult integrate_dopri45(const OdeRhs& rhs, std::span<const double> y0,
                            double t0, double t1, const SolverConfig& config) {
    const std::size_t n = y0.size();
    OdeResult res;
    res.state.assign(y0.begin(), y0.end());
    auto& y = res.state;

    double t = t0;
    double h = (t1 - t0) / 100.0;
    const double direction = t1 > t0 ? 1.0 : -1.0;
    double err_prev = 1.0;

    // Seven stage slots; stage 0 is reused across steps (the last stage of an
    // accepted step equals the first stage of the next).
    std::vector<std::vector<double>> k(7, std::vector<double>(n));
    std::vector<double> yi(n), y5(n);

    rhs(t, y, k[0]);
    res.rhs_evals += 1;

    while ((t1 - t) * direction > 1e-14) {
        if ((t + h - t1) * direction > 0.0) h = t1 - t;
        if (t + h == t) {
            raise(errc::solver_failure, "solver: step size underflow at t = " +
                                            std::to_string(t));
        }
        for (std::size_t s = 1; s < 7; ++s) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < s; ++j) acc += kA[s][j] * k[j][i];
                yi[i] = y[i] + h * acc;
            }
            rhs(t + kC[s] * h, yi, k[s]);
        }
        res.rhs_evals += 6;

        double err_ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc5 = 0.0, acce = 0.0;
            for (std::size_t j = 0; j < 7; ++j) {
                acc5 += kB5[j] * k[j][i];
                acce += (kB5[j] - kB4[j]) * k[j][i];
            }
            y5[i] = y[i] + h * acc5;
            const double sc =
                config.atol + config.rtol * std::max(std::abs(y[i]),
                                                     std::abs(y5[i]));
            const double r = h * acce / sc;
            err_ss += r * r;
        }
        const double err =
            std::sqrt(err_ss / static_cast<double>(n)) + 1e-300;
        if (!std::isfinite(err)) {
            check_finite(y5, "state");
            raise(errc::nonfinite_state,
                  "solver: error estimate left the finite domain");
        }

        if (err <= 1.0) {
            t += h;
            std::swap(y, y5);
            std::swap(k[0], k[6]);  // first-same-as-last
            const double fac =
                0.9 * std::pow(err, -0.12) * std::pow(err_prev, 0.08);
            err_prev = err;
            h *= std::min(5.0, std::max(0.2, fac));
            res.steps += 1;
            if (res.steps > config.max_steps) {
                raise(errc::solver_failure,
                      "solver: exceeded " + std::to_string(config.max_steps) +
                          " accepted steps");
            }
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    return res;
}

}  // namespace

OdeResult integrate_ode(const OdeRhs& rhs, std::span<const double> y0,
                        double t0, double t1, const SolverConfig& config) {
    config.validate();
    require(!y0.empty(), errc::invalid_input, "solver: empty state");
    check_finite(y0, "initial state");
    require(std::isfinite(t0) && std::isfinite(t1), errc::invalid_input,
            "solver: non-finite time endpoint");
    if (t0 == t1) {
        OdeResult res;
        res.state.assign(y0.begin(), y0.end());
        return res;
    }
    switch (config.method) {
        case OdeMethod::rk4:
            return integrate_rk4(rhs, y0, t0, t1, config);
        case OdeMethod::dopri45:
            return integrate_dopri45(rhs, y0, t0, t1, config);
    }
    raise(errc::configuration, "solver: unknown method");
}

}  // namespace sitn

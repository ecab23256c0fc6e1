#pragma once

#include <cmath>
#include <vector>

#include "imdev/process.hpp"

namespace imdev::testing {

// X_t = eps_t with eps uniform on {-1, 1}.
inline ProcessSpec iid_signs() {
    ProcessSpec s;
    s.family = Family::memory_one_infinite;
    s.coefficients.values = {0.0};
    s.lag_law = LagLaw::degenerate(1);
    s.innovation = InnovationLaw(Rademacher{});
    return s;
}

// Constant zero process.
inline ProcessSpec degenerate() {
    auto s = iid_signs();
    s.innovation = InnovationLaw(TwoPoint{1.0, 0.0, 1.0});
    return s;
}

// a_i = 0.25 * 0.5^(i-1), geometric lag law, sign innovations.
inline ProcessSpec memory_one_geometric() {
    ProcessSpec s;
    s.family = Family::memory_one_infinite;
    s.coefficients.tail = GeometricTail{0.25, 0.5};
    s.lag_law = LagLaw::geometric(0.5);
    s.innovation = InnovationLaw(Rademacher{});
    return s;
}

// r = s tanh(u / s) applied to sum a_i X_{t-i}, a_i = 0.3 * 0.5^(i-1).
inline ProcessSpec mean_field_tanh() {
    ProcessSpec s;
    s.family = Family::mean_field_memory;
    s.coefficients.tail = GeometricTail{0.3, 0.5};
    s.response = Response{Response::Kind::tanh_scaled, 2.0};
    s.innovation = InnovationLaw(Rademacher{});
    return s;
}

inline double rel_err(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// Golden-section minimizer for a unimodal function on [lo, hi].
template <class F>
double golden_min(F&& f, double lo, double hi, int iters = 400) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace imdev::testing

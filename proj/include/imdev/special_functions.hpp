#pragma once

namespace imdev {

// log H_n(x, v); -inf for x > n.
double log_hn_function(double x, double v, double n);
// H_n(x, v) = [ (v^2/(x+v^2))^{x+v^2} (n/(n-x))^{n-x} ]^{n/(n+v^2)} 1{x <= n}
double hn_function(double x, double v, double n);

double log_bennett_b(double x, double v);
// (v^2/(x+v^2))^{x+v^2} e^x
double bennett_b(double x, double v);
// exp(-x^2 / (2 (v^2 + x/3)))
double bernstein_b1(double x, double v);
double log_bernstein_b1(double x, double v);

// l(t) = t - ln t - 1 + t/(e^t - 1) + ln(1 - e^{-t}), t > 0
double rio_ell(double t);
double rio_ell_prime(double t);

struct YoungResult {
    double value = 0.0;
    double argmax = 0.0;
    bool used_fallback = false;
};

// l*(x) = sup_{t>0} (x t - l(t)) for x in [0, 1).
YoungResult rio_ell_star_detail(double x);
double rio_ell_star(double x);

}  // namespace imdev

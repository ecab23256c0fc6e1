#include "imdev/special_functions.hpp"

#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "imdev/errors.hpp"

namespace imdev {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_xv(double x, double v, const char* who) {
    if (!(x >= 0.0) || !(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string(who) + ": requires x >= 0 and v > 0");
}

}  // namespace

double log_hn_function(double x, double v, double n) {
    check_xv(x, v, "hn_function");
    if (!(n >= 1.0)) throw DomainError("hn_function: requires n >= 1");
    if (x > n) return -kInf;
    if (x == 0.0) return 0.0;
    const double v2 = v * v;
    // (x+v^2) ln(v^2/(x+v^2)) = -(x+v^2) log1p(x/v^2)
    const double first = -(x + v2) * std::log1p(x / v2);
    // (n-x) ln(n/(n-x)) = -(n-x) log1p(-x/n); zero at x = n
    const double second = (x == n) ? 0.0 : -(n - x) * std::log1p(-x / n);
    return (n / (n + v2)) * (first + second);
}

double hn_function(double x, double v, double n) { return std::exp(log_hn_function(x, v, n)); }

double log_bennett_b(double x, double v) {
    check_xv(x, v, "bennett_b");
    const double v2 = v * v;
    return x - (x + v2) * std::log1p(x / v2);
}

double bennett_b(double x, double v) { return std::exp(log_bennett_b(x, v)); }

double log_bernstein_b1(double x, double v) {
    check_xv(x, v, "bernstein_b1");
    return -x * x / (2.0 * (v * v + x / 3.0));
}

double bernstein_b1(double x, double v) { return std::exp(log_bernstein_b1(x, v)); }

double rio_ell(double t) {
    if (!(t > 0.0)) throw DomainError("rio_ell: requires t > 0");
    if (t < 0.05) {
        const double t2 = t * t;
        return t2 * (1.0 / 8.0 + t2 * (-1.0 / 576.0 + t2 * (1.0 / 25920.0 - t2 / 1075200.0)));
    }
    // (t - 1) + t/(e^t - 1) + ln((1 - e^{-t})/t)
    return (t - 1.0) + t / std::expm1(t) + std::log(-std::expm1(-t) / t);
}

double rio_ell_prime(double t) {
    if (!(t > 0.0)) throw DomainError("rio_ell_prime: requires t > 0");
    if (t < 0.05) {
        const double t2 = t * t;
        return t * (0.25 + t2 * (-1.0 / 144.0 + t2 * (1.0 / 4320.0 - t2 / 134400.0)));
    }
    if (t > 700.0) return 1.0 - 1.0 / t;
    const double em = std::expm1(t);
    // t e^t/(e^t-1)^2 = t / (em * (1 - e^{-t}))
    return 1.0 - 1.0 / t + 2.0 / em - t / (em * -std::expm1(-t));
}

YoungResult rio_ell_star_detail(double x) {
    if (!(x >= 0.0) || !(x < 1.0)) throw DomainError("rio_ell_star: requires x in [0, 1)");
    YoungResult r;
    if (x == 0.0) return r;
    // l' increases from 0 to 1; bracket the root of l'(t) = x by doubling from t = 1.
    double lo = 0.0, hi = 1.0;
    bool bracketed = false;
    for (int i = 0; i < 60; ++i) {
        if (rio_ell_prime(hi) >= x) {
            bracketed = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if (bracketed) {
        for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
            const double mid = 0.5 * (lo + hi);
            (rio_ell_prime(mid) < x ? lo : hi) = mid;
        }
        const double t = 0.5 * (lo + hi);
        r.argmax = t;
        r.value = x * t - rio_ell(t);
        return r;
    }
    auto neg = [x](double t) { return -(x * t - rio_ell(t)); };
    const auto [t, v] = boost::math::tools::brent_find_minima(neg, 1e-8, 50.0, 52);
    r.argmax = t;
    r.value = -v;
    r.used_fallback = true;
    return r;
}

double rio_ell_star(double x) { return rio_ell_star_detail(x).value; }

}  // namespace imdev

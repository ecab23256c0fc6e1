#include <cmath>
#include <limits>

#include "doctest.h"
#include "imdev/errors.hpp"
#include "imdev/special_functions.hpp"
#include "support.hpp"

using namespace imdev;

TEST_CASE("rio ell reference values") {
    CHECK(rio_ell(0.5) == doctest::Approx(0.031142092).epsilon(1e-8));
    CHECK(rio_ell_prime(0.5) == doctest::Approx(0.124139).epsilon(1e-5));
    CHECK(rio_ell(3.0) == doctest::Approx(1.0075056).epsilon(1e-7));
    CHECK(rio_ell_prime(3.0) == doctest::Approx(0.606035).epsilon(1e-5));
}

TEST_CASE("ell' matches a central difference and the series joins smoothly") {
    for (double t : {0.01, 0.049, 0.051, 0.2, 1.0, 5.0, 30.0}) {
        const double h = 1e-5 * std::max(1.0, t);
        const double fd = (rio_ell(t + h) - rio_ell(t - h)) / (2 * h);
        CHECK(rio_ell_prime(t) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(testing::rel_err(rio_ell(0.05 - 1e-12), rio_ell(0.05 + 1e-12)) < 1e-9);
    CHECK(rio_ell_prime(800.0) == doctest::Approx(1.0 - 1.0 / 800.0));
}

TEST_CASE("young transform chain and dense-grid agreement") {
    double worst = 0;
    for (int i = 1; i <= 999; i += 7) {
        const double x = 0.999 * i / 1000.0;
        const double ls = rio_ell_star(x);
        CHECK(ls >= (x * x - 2 * x) * std::log1p(-x) - 1e-14);
        CHECK((x * x - 2 * x) * std::log1p(-x) >= 2 * x * x + std::pow(x, 4) / 6 - 1e-14);
        const auto det = rio_ell_star_detail(x);
        // Dense grid around the reported maximizer.
        double best = -1e300;
        const double t0 = det.argmax;
        for (int j = -2000; j <= 2000; ++j) {
            const double t = t0 * (1.0 + j * 1e-5);
            if (t > 0) best = std::max(best, x * t - rio_ell(t));
        }
        worst = std::max(worst, std::abs(best - ls));
        CHECK(best <= ls + 1e-12);
    }
    CHECK(worst <= 1e-8);
    CHECK(rio_ell_star(0.0) == 0.0);
    CHECK_THROWS_AS(rio_ell_star(1.0), DomainError);
    CHECK_THROWS_AS(rio_ell_star(-0.1), DomainError);
}

TEST_CASE("hoeffding, bennett and bernstein functions") {
    for (double n : {1.0, 10.0, 100.0, 1000.0})
        for (double v : {0.05, 0.5, 1.0, 3.0, 10.0})
            for (int j = 0; j <= 40; ++j) {
                const double x = n * j / 40.0;
                const double h = log_hn_function(x, v, n), b = log_bennett_b(x, v);
                const double b1 = log_bernstein_b1(x, v);
                CHECK(std::isfinite(b));
                CHECK(h <= b + 1e-12 * (1 + std::abs(b)));
                CHECK(b <= b1 + 1e-12 * (1 + std::abs(b1)));
            }
    const double n = 10, v = 2;
    CHECK(hn_function(n, v, n) == doctest::Approx(std::pow(v * v / (n + v * v), n)).epsilon(1e-14));
    CHECK(testing::rel_err(hn_function(n * (1 - 1e-12), v, n), hn_function(n, v, n)) <= 1e-8);
    CHECK(hn_function(n + 1e-9, v, n) == 0.0);
    CHECK(log_hn_function(n + 1, v, n) == -std::numeric_limits<double>::infinity());
    CHECK(hn_function(0, v, n) == 1.0);
    CHECK(bennett_b(0, v) == 1.0);
    // Exact formula at moderate arguments.
    const double x = 3, vv = 1.5;
    const double ref = std::pow(vv * vv / (x + vv * vv), x + vv * vv) * std::exp(x);
    CHECK(bennett_b(x, vv) == doctest::Approx(ref).epsilon(1e-13));
    CHECK(bernstein_b1(x, vv) == doctest::Approx(std::exp(-x * x / (2 * (vv * vv + x / 3)))).epsilon(1e-14));
}

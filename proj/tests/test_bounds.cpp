#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "imdev/bounds.hpp"
#include "imdev/errors.hpp"
#include "imdev/special_functions.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace imdev;
using imdev::testing::bisect_root;
using imdev::testing::rel_err;

namespace {

LipschitzTable zero_table(std::size_t n) {
    return build_lipschitz_table(ContractionProfile(std::vector<double>{}), n);
}

}  // namespace

TEST_CASE("bernstein optimizer matches numerical minimization") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lx(-3.0, 3.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double x = std::pow(10.0, lx(rng));
        const double v = std::pow(10.0, lx(rng));
        const double delta = trial % 10 == 0 ? 0.0 : std::pow(10.0, lx(rng));
        // Stationarity of -t x + t^2 V / (2 (1 - t delta)).
        auto deriv = [&](double t) {
            const double s = 1.0 - t * delta;
            return -x + v * t * (2.0 - t * delta) / (2.0 * s * s);
        };
        const double hi = delta > 0.0 ? 1.0 / delta : 10.0 * x / v + 1.0;
        const double t_num = bisect_root(deriv, 0.0, hi);
        const double t = bernstein_optimal_t(x, v, delta);
        CHECK(rel_err(t, t_num) <= 1e-8);

        const double t_golden =
            imdev::testing::golden_min([&](double s) { return bernstein_exponent(s, x, v, delta); }, 0.0, hi);
        CHECK(bernstein_exponent(t, x, v, delta) <= bernstein_exponent(t_golden, x, v, delta) + 1e-12 * (1.0 + std::abs(bernstein_exponent(t_golden, x, v, delta))));

        const auto b = bernstein_bound(x, v, delta);
        if (b.raw > 1e-300)
            CHECK(std::abs(std::log(b.raw) - bernstein_exponent(t, x, v, delta)) <= 1e-9 * (1.0 + t * x));
        CHECK(b.raw <= *b.looser * (1.0 + 1e-14));
    }
}

TEST_CASE("cramer optimizer matches numerical minimization") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> lx(-3.0, 3.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double x = std::pow(10.0, lx(rng));
        const double k = std::pow(10.0, lx(rng));
        const double delta = std::pow(10.0, lx(rng));
        auto deriv = [&](double t) {
            const double s = 1.0 - t / delta;
            return -x + k / (delta * delta) * t * (2.0 - t / delta) / (s * s);
        };
        const double t_num = bisect_root(deriv, 0.0, delta);
        const double t = cramer_optimal_t(x, k, delta);
        CHECK(rel_err(t, t_num) <= 1e-8);

        const auto b = cramer_bound(x, k, delta);
        if (b.raw > 1e-300)
            CHECK(std::abs(std::log(b.raw) - cramer_exponent(t, x, k, delta)) <= 1e-9 * (1.0 + t * x));
        CHECK(b.raw <= *b.looser * (1.0 + 1e-14));
    }
}

TEST_CASE("subgaussian sharper form below looser form") {
    for (double x : {0.1, 1.0, 3.0, 10.0})
        for (double r : {0.0, 0.01, 0.5, 4.0}) {
            const auto b = subgaussian_bound(x, r);
            CHECK(b.raw <= *b.looser * (1.0 + 1e-14));
        }
    CHECK(subgaussian_bound(2.0, 0.0).raw == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("nonpositive thresholds give the trivial bound") {
    CHECK(bernstein_bound(0.0, 1.0, 1.0).value == 1.0);
    CHECK(cramer_bound(-1.0, 1.0, 1.0).value == 1.0);
    CHECK(hoeffding_bound(0.0, 1.0, 1.0, 1.0, 10).value == 1.0);
    CHECK(mcdiarmid_bound(0.0, 5.0, 5.0).value == 1.0);
    CHECK(vbe_tail(0.0, 1.0, 1.5).value == 1.0);
    CHECK(fuk_nagaev_pth(0.0, 3.0, 1.0, 1.0).value == 1.0);
}

TEST_CASE("two-sided doubling and native two-sided kinds") {
    const auto up = bernstein_bound(5.0, 4.0, 0.5, Side::upper);
    const auto two = bernstein_bound(5.0, 4.0, 0.5, Side::two_sided);
    CHECK(two.value == doctest::Approx(std::min(1.0, 2.0 * up.raw)));
    CHECK(!two.native_two_sided);

    const auto v = vbe_tail(10.0, 3.0, 1.5);
    CHECK(v.native_two_sided);
    CHECK(v.side == Side::two_sided);
    CHECK(v.value == doctest::Approx(3.0 / std::pow(10.0, 1.5)));

    const auto big = bernstein_bound(0.01, 100.0, 1.0, Side::two_sided);
    CHECK(big.value == 1.0);
    CHECK(big.clamped);
}

TEST_CASE("mcdiarmid forms and domain") {
    const double d = 4.0, m2 = 6.0;
    for (double x = 0.05; x < d; x += 0.05) {
        const auto f = mcdiarmid_forms(x, d, m2);
        CHECK(f.ell_star_form <= f.product_form * (1.0 + 1e-12));
        CHECK(f.product_form <= f.classical_form * (1.0 + 1e-12));
    }
    CHECK(mcdiarmid_bound(d, d, m2).value == 0.0);
    const auto out = mcdiarmid_bound(d * 1.01, d, m2);
    CHECK(!out.valid);
    CHECK(out.reason == "x > D");
    CHECK_THROWS_AS(mcdiarmid_forms(d * 2.0, d, m2), DomainError);
}

TEST_CASE("hoeffding dominates the exact binomial tail for iid signs") {
    const std::size_t n = 20;
    const auto table = zero_table(n);
    DominatingSpec spec;
    spec.kind = DominatingKind::bounded;
    spec.M = 1.0;
    spec.V = {1.0};
    spec.Mk = {2.0};
    for (int x = 1; x <= static_cast<int>(n); ++x) {
        // P(S >= x) with S = 2B - n, B ~ Bin(n, 1/2)
        double exact = 0.0;
        for (std::size_t b = 0; b <= n; ++b)
            if (2.0 * b - n >= x) exact += std::exp(std::lgamma(n + 1.0) - std::lgamma(b + 1.0) - std::lgamma(n - b + 1.0) - n * std::log(2.0));
        const auto h = hoeffding_bound(spec, table, x);
        CHECK(h.value >= exact);
        const auto m = mcdiarmid_bound(spec, table, x);
        CHECK(m.value >= exact * (1.0 - 1e-12));
    }
    // At x = n the Hoeffding function reduces to (v^2 / (n + v^2))^n, here the exact P(S = n).
    const auto h = hoeffding_bound(spec, table, 20.0);
    CHECK(rel_err(h.raw, std::pow(0.5, 20.0)) <= 1e-10);
}

TEST_CASE("lipschitz-weighted aggregates") {
    const auto table = build_lipschitz_table(ContractionProfile::geometric(0.3, 0.5), 8);
    std::vector<double> ones(8, 1.0);
    double s2 = 0.0;
    for (std::size_t k = 1; k <= 8; ++k) s2 += std::pow(table.increment_weight(k), 2.0);
    CHECK(aggregate_v(table, ones) == doctest::Approx(s2));
    CHECK(weighted_power_sum(table, ones, 2.0) == doctest::Approx(s2));
    CHECK(mz_aggregate(table, ones, 2.0) == doctest::Approx(s2));

    const double w1 = table.increment_weight(1);
    double mz4 = w1 * w1;
    for (std::size_t k = 2; k <= 8; ++k) mz4 += 3.0 * std::pow(table.increment_weight(k), 2.0);
    CHECK(mz_norm_bound(table, ones, 4.0) == doctest::Approx(std::sqrt(mz4)));

    double vbe = std::pow(w1, 1.5);
    for (std::size_t k = 2; k <= 8; ++k) vbe += std::pow(2.0, 0.5) * std::pow(table.increment_weight(k), 1.5);
    CHECK(von_bahr_esseen(table, ones, 1.5) == doctest::Approx(std::pow(vbe, 1.0 / 1.5)));
    CHECK_THROWS_AS(vbe_aggregate(table, ones, 2.5), DomainError);
    CHECK_THROWS_AS(aggregate_v(table, std::vector<double>(3, 1.0)), DomainError);
}

TEST_CASE("rosenthal constant minimization") {
    const auto r = rosenthal_bound(4.0, 0.5, 4.0);
    for (double c = 1.0; c <= 4.0; c += 0.01)
        CHECK(r.value <= (rosenthal_c1(c) * 2.0 + rosenthal_c2(c, 4.0) * 0.5) * (1.0 + 1e-3));
    CHECK(r.c >= 1.0);
    CHECK(r.c <= 4.0);
    const auto w = weak_rosenthal_tail(10.0, 4.0, 0.5, 4.0);
    CHECK(w.constant_uncertain);
    CHECK_THROWS_AS(rosenthal_bound(1.0, 1.0, 1.5), DomainError);
}

TEST_CASE("weak vbe constant and domain") {
    CHECK(weak_vbe_constant(1.5) == doctest::Approx(4.0 * 1.5 / 0.5 + 8.0 / 0.5));
    CHECK(!weak_vbe_tail(1.0, 1.0, 2.0).valid);
    CHECK(weak_vbe_tail(100.0, 1.0, 1.5).native_two_sided);
}

TEST_CASE("fuk-nagaev p-th moment form") {
    const auto b = fuk_nagaev_pth(10.0, 3.0, 2.0, 5.0);
    const double poly = 2.0 * std::pow(1.0 + 2.0 / 3.0, 3.0) * 2.0 / 1000.0;
    const double ex = 2.0 * std::exp(-2.0 / (25.0 * std::exp(3.0)) * 100.0 / 5.0);
    CHECK(b.raw == doctest::Approx(poly + ex));
    CHECK(b.native_two_sided);
    CHECK_THROWS_AS(fuk_nagaev_pth(1.0, 1.5, 1.0, 1.0), DomainError);
}

TEST_CASE("semi-exponential bounds") {
    const auto g = semiexp_g_bound(3.0, 2.0, 0.5, 0.5);
    CHECK(g.raw == doctest::Approx(2.0 * std::exp(-9.0 / (2.0 * (2.0 * 0.25 + std::pow(3.0, 1.5) * std::sqrt(0.5))))));
    CHECK(!semiexp_g_bound(3.0, 0.5, 0.5, 0.5).valid);
    CHECK_THROWS_AS(semiexp_g_bound(3.0, 2.0, 0.5, 1.5), DomainError);

    const auto h = semiexp_h_bound(1.0, 100, 0.5, 0.5, 1.0);
    CHECK(h.aggregates.at("rate") == doctest::Approx(std::pow(1.0 / 4.0, 1.0) * 10.0));
    CHECK(h.raw == doctest::Approx(h.aggregates.at("C") * std::exp(-h.aggregates.at("rate"))));
}

TEST_CASE("cramer exponent is linear in n at x = c n") {
    // Uniform K_k = 1, t0 = 1, contraction a_i = 0.2 * 0.5^(i-1).
    const auto profile = ContractionProfile::geometric(0.2, 0.5);
    DominatingSpec spec;
    spec.kind = DominatingKind::cramer;
    spec.t0 = 1.0;
    spec.K = {1.0};
    std::vector<double> rates;
    for (std::size_t n : {100, 200, 400, 800}) {
        const auto table = build_lipschitz_table(profile, n);
        const auto b = cramer_bound(spec, table, 0.5 * static_cast<double>(n));
        rates.push_back(-std::log(b.raw) / static_cast<double>(n));
    }
    for (double r : rates) CHECK(r > 0.0);
    const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
    CHECK(*hi / *lo <= 2.0);
}

TEST_CASE("semiexp_h exponent scales as n^alpha") {
    const auto profile = ContractionProfile::geometric(0.2, 0.5);
    DominatingSpec spec;
    spec.kind = DominatingKind::semiexp_h;
    spec.alpha = 0.5;
    spec.C1 = 3.0;
    std::vector<double> rates;
    for (std::size_t n : {100, 200, 400, 800}) {
        const auto table = build_lipschitz_table(profile, n);
        const auto b = semiexp_h_bound(spec, table, 16.0);
        rates.push_back(-std::log(b.raw) / std::pow(static_cast<double>(n), spec.alpha));
    }
    for (double r : rates) CHECK(r > 0.0);
    const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
    CHECK(*hi / *lo <= 2.0);
}

TEST_CASE("evaluate_bound dispatch and kind checks") {
    const auto table = zero_table(10);
    DominatingSpec spec;
    spec.kind = DominatingKind::bernstein;
    spec.M = 1.0;
    spec.V = {1.0};
    const auto b = evaluate_bound(BoundKind::bernstein, spec, table, 3.0);
    CHECK(b.value == doctest::Approx(bernstein_bound(3.0, 10.0, 1.0).value));
    CHECK_THROWS(evaluate_bound(BoundKind::cramer, spec, table, 3.0));

    for (int i = 0; i <= static_cast<int>(BoundKind::weak_rosenthal); ++i) {
        const auto k = static_cast<BoundKind>(i);
        CHECK(bound_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(bound_kind_from_string("chebyshev"), ConfigError);
}

#include <cmath>
#include <functional>
#include <map>

#include "doctest.h"
#include "imdev/coefficients.hpp"
#include "imdev/errors.hpp"
#include "imdev/oracle.hpp"
#include "imdev/rng.hpp"
#include "oracles.hpp"

using namespace imdev;

using namespace imdev::testing;

TEST_CASE("randomized instances: decomposition, domination and Lipschitz property") {
    CounterStream rng(31337, StreamPurpose::generic, 0, 0);
    for (int rep = 0; rep < 50; ++rep) {
        const auto inst = random_instance(rng, rep % 2 == 1);
        auto report = enumerate_decomposition(inst);
        CHECK(report.telescoping_error <= 1e-12);
        CHECK(report.martingale_error <= 1e-12);

        const std::size_t n = inst.horizon();
        for (std::size_t k = 0; k <= n; ++k) {
            const auto means = grouped_means(inst, k);
            double worst = 0;
            for (std::size_t path = 0; path < report.paths; ++path) {
                std::vector<std::size_t> key;
                for (std::size_t j = 0; j < k; ++j) key.push_back(report.letter[j][path]);
                worst = std::max(worst, std::abs(means.at(key) - report.g[k][path]));
            }
            CHECK(worst <= 1e-12);
        }

        const auto table = build_lipschitz_table(instance_certificate(inst), n);
        const auto dom = verify_increment_domination(inst, table, &report);
        const auto lip = verify_g_lipschitz(inst, table, &report);
        CHECK(dom.max_ratio <= 1.0 + 1e-9);
        CHECK(lip.max_ratio <= 1.0 + 1e-9);
        CHECK(dom.used_g == instance_supports_c2(inst));
    }
}

TEST_CASE("conditional expectation matches the decomposition") {
    CounterStream rng(5, StreamPurpose::generic, 0, 0);
    const auto inst = random_instance(rng, false);
    const auto report = enumerate_decomposition(inst);
    for (std::size_t path = 0; path < report.paths; path += 3) {
        std::vector<double> prefix;
        for (std::size_t k = 0; k <= inst.horizon(); ++k) {
            CHECK(conditional_expectation(inst, prefix) == doctest::Approx(report.g[k][path]).epsilon(1e-12));
            if (k < inst.horizon()) prefix.push_back(report.x[k][path]);
        }
    }
}

TEST_CASE("iid signs: d_k is the k-th sign") {
    FiniteInstance inst;
    inst.map.family = Family::memory_one_infinite;
    inst.map.coefficients.values = {0.0};
    for (int t = 0; t < 4; ++t) inst.alphabets.push_back({{{1, 0, 1.0}, 0.5}, {{1, 0, -1.0}, 0.5}});
    const auto r = enumerate_decomposition(inst);
    CHECK(r.paths == 16);
    CHECK(r.mean_f == 0.0);
    for (std::size_t k = 1; k <= 4; ++k)
        for (std::size_t p = 0; p < r.paths; ++p) CHECK(r.d[k - 1][p] == r.x[k - 1][p]);
}

TEST_CASE("validation") {
    FiniteInstance inst;
    inst.map.family = Family::memory_one_infinite;
    inst.map.coefficients.values = {0.0};
    CHECK_THROWS_AS(inst.validate(), DomainError);
    inst.alphabets.push_back({{{1, 0, 1.0}, 0.5}, {{1, 0, -1.0}, 0.4}});
    CHECK_THROWS_AS(inst.validate(), DomainError);
    inst.alphabets[0][1].prob = 0.5;
    CHECK_NOTHROW(inst.validate());
    for (int t = 0; t < 8; ++t) inst.alphabets.push_back(inst.alphabets[0]);
    CHECK_THROWS_AS(inst.validate(), DomainError);
}

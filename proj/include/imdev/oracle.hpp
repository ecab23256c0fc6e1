#pragma once

#include <cstddef>
#include <vector>

#include "imdev/coefficients.hpp"
#include "imdev/functional.hpp"
#include "imdev/process.hpp"

namespace imdev {

struct Letter {
    InnovationDraw draw;
    double prob = 0.0;
};

// Small process with finite innovation alphabets, enumerable path by path.
// The update map comes from `map` (family, coefficients, response, floor);
// its lag and innovation laws are ignored in favour of the alphabets.
struct FiniteInstance {
    static constexpr std::size_t kMaxHorizon = 8;
    static constexpr std::size_t kMaxPaths = 1'000'000;

    ProcessSpec map;
    std::vector<std::vector<Letter>> alphabets;  // one per time index 1..n
    std::vector<double> initial_past;            // x_0, x_{-1}, ...
    FunctionalSpec functional;

    std::size_t horizon() const noexcept { return alphabets.size(); }
    std::size_t path_count() const;
    void validate() const;
};

// Dominating profile read off the alphabets (sup over time indices).
ContractionProfile instance_certificate(const FiniteInstance& instance);
// True when each alphabet carries a single lag and the map is additive in xi.
bool instance_supports_c2(const FiniteInstance& instance);

struct DecompositionReport {
    std::size_t horizon = 0;
    std::size_t paths = 0;
    std::vector<double> path_prob;           // [path]
    std::vector<std::vector<double>> x;      // [k-1][path], X_k
    std::vector<std::vector<double>> g;      // [k][path], k = 0..n
    std::vector<std::vector<double>> d;      // [k-1][path], d_k
    std::vector<std::vector<std::size_t>> letter;  // [k-1][path]
    double mean_f = 0.0;
    double telescoping_error = 0.0;   // max |sum d_k - (f - E f)|
    double martingale_error = 0.0;    // max |E[d_k | prefix atom]|
    double domination_ratio = -1.0;   // filled by verify_increment_domination
    double lipschitz_ratio = -1.0;    // filled by verify_g_lipschitz
    bool domination_used_g = false;
};

DecompositionReport enumerate_decomposition(const FiniteInstance& instance);

// g_k(x_1..x_k) for an arbitrary prefix, by enumerating future innovations.
double conditional_expectation(const FiniteInstance& instance, std::span<const double> prefix);

struct RatioResult {
    double max_ratio = 0.0;
    bool used_g = false;  // G-based or H-based
};

RatioResult verify_increment_domination(const FiniteInstance& instance, const LipschitzTable& table,
                                        DecompositionReport* report = nullptr);
RatioResult verify_g_lipschitz(const FiniteInstance& instance, const LipschitzTable& table,
                               DecompositionReport* report = nullptr);

}  // namespace imdev

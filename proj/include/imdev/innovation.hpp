#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "imdev/rng.hpp"

namespace imdev {

struct Gaussian {
    double mean = 0.0;
    double std = 1.0;
};
struct Uniform {
    double lo = -1.0;
    double hi = 1.0;
};
struct Rademacher {};
// value_a with probability p, value_b with probability 1 - p
struct TwoPoint {
    double p = 0.5;
    double value_a = 1.0;
    double value_b = -1.0;
};
// Centered Laplace law with density exp(-|y|/scale) / (2 scale).
struct Laplace {
    double scale = 1.0;
};

// Law of the real part of an innovation. d(x, y) = |x - y| throughout.
class InnovationLaw {
public:
    using Kind = std::variant<Gaussian, Uniform, Rademacher, TwoPoint, Laplace>;

    InnovationLaw() : kind_(Rademacher{}) {}
    InnovationLaw(Kind kind);  // validates

    const Kind& kind() const noexcept { return kind_; }
    std::string name() const;

    double sample(CounterStream& rng) const;

    // G(y) = E|y - e'| for an independent copy e'. E|e| = G(0).
    double dominating_g(double y) const;
    double mean_abs() const { return dominating_g(0.0); }
    double mean() const;

    bool bounded() const;
    // Essential support [lo, hi]; only meaningful when bounded().
    std::pair<double, double> support() const;
    // Finite atoms with probabilities for discrete laws.
    std::optional<std::vector<std::pair<double, double>>> atoms() const;
    // ess sup G(e); G is convex so the sup sits at a support endpoint.
    std::optional<double> g_essential_sup() const;
    // ess sup |e - e'|
    std::optional<double> increment_range() const;

private:
    Kind kind_;
};

double standard_normal_cdf(double z);

// Discrete law on {1, 2, ...} with finite support. Laws given with infinite
// support are truncated at quantile 1 - 1e-9 and renormalized; the removed
// mass is recorded.
class LagLaw {
public:
    static constexpr double kTruncationQuantile = 1e-9;

    LagLaw() : pmf_{1.0} {}
    // pmf[j-1] = P(J = j); truncated_mass records mass removed upstream.
    explicit LagLaw(std::vector<double> pmf, double truncated_mass = 0.0);

    static LagLaw degenerate(std::size_t lag);
    static LagLaw uniform(std::size_t max_lag);
    // P(J = j) = (1 - q) q^(j-1)
    static LagLaw geometric(double q);

    std::size_t max_lag() const noexcept { return pmf_.size(); }
    double prob(std::size_t j) const;
    double prob_at_least(std::size_t j) const;
    bool is_degenerate() const;
    const std::vector<double>& pmf() const noexcept { return pmf_; }
    double truncated_mass() const noexcept { return truncated_mass_; }

    std::size_t sample(CounterStream& rng) const;

private:
    std::vector<double> pmf_;
    std::vector<double> cdf_;
    double truncated_mass_ = 0.0;
    void finalize();
};

}  // namespace imdev

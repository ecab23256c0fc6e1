#pragma once

#include <cstddef>
#include <variant>
#include <vector>

namespace imdev {

struct NoTail {};

// a_{L+j} = first * ratio^(j-1) for j >= 1, with 0 <= ratio < 1.
struct GeometricTail {
    double first = 0.0;
    double ratio = 0.0;
};

// a_i = constant * i^(-exponent) for i > L, exponent > 1.
struct PowerTail {
    double exponent = 2.0;
    double constant = 0.0;
};

using ProfileTail = std::variant<NoTail, GeometricTail, PowerTail>;

// Nonnegative sequence (a_i)_{i>=1} dominating the expected one-step
// increment of the update maps. Strictly contractive: sum a_i < 1 - 1e-12.
class ContractionProfile {
public:
    static constexpr double kContractionMargin = 1e-12;

    ContractionProfile() = default;
    explicit ContractionProfile(std::vector<double> explicit_coeffs, ProfileTail tail = NoTail{});

    // a_1 = first, a_i = first * ratio^(i-1)
    static ContractionProfile geometric(double first, double ratio);

    // 1-based; returns 0 for i == 0.
    double coefficient(std::size_t i) const;
    std::vector<double> leading(std::size_t count) const;

    const std::vector<double>& explicit_coeffs() const noexcept { return explicit_; }
    const ProfileTail& tail() const noexcept { return tail_; }
    double total_sum() const noexcept { return total_sum_; }
    double max_coeff() const noexcept { return max_coeff_; }
    double tail_sum_beyond(std::size_t index) const;

    // True when a_1 >= a_2 >= ... over the first `count` coefficients.
    bool non_increasing(std::size_t count) const;

private:
    std::vector<double> explicit_;
    ProfileTail tail_ = NoTail{};
    double total_sum_ = 0.0;
    double max_coeff_ = 0.0;
};

// Triangular array a_k(i), k in [0, n-1], i in [k, n-1]:
//   a_0(i) = 1,  a_{k+1}(i) = a_k(i) + a_k(k) * a_{i-k}.
class LipschitzTable {
public:
    std::size_t horizon() const noexcept { return n_; }
    double at(std::size_t k, std::size_t i) const;
    double diagonal(std::size_t k) const { return diagonal_.at(k); }
    const std::vector<double>& diagonal() const noexcept { return diagonal_; }

    // Weight attached to the k-th martingale increment, a_{n-k}(n-k), k in [1, n].
    double increment_weight(std::size_t k) const;
    std::vector<double> increment_weights() const;

    friend LipschitzTable build_lipschitz_table(const ContractionProfile& profile, std::size_t n);

private:
    std::size_t n_ = 0;
    std::vector<std::vector<double>> rows_;  // rows_[k][i - k]
    std::vector<double> diagonal_;
};

LipschitzTable build_lipschitz_table(const ContractionProfile& profile, std::size_t n);

// (1 + max a_i) / (1 - sum a_i); dominates every diagonal entry when the
// profile is non-increasing.
double diagonal_uniform_bound(const ContractionProfile& profile);

struct DiagonalCheck {
    bool checked = false;  // false for non-monotone profiles
    bool monotone = true;
    bool within_uniform_bound = true;
    double max_diagonal = 0.0;
    double uniform_bound = 0.0;
};

// Monotone-diagonal and uniform-bound checks; skipped with a diagnostic on
// stderr when the profile is not non-increasing.
DiagonalCheck check_diagonal(const ContractionProfile& profile, const LipschitzTable& table);

}  // namespace imdev

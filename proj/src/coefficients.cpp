#include "imdev/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <string>

#include "imdev/errors.hpp"

namespace imdev {

namespace {

double power_tail_sum(const PowerTail& t, std::size_t last_explicit) {
    if (t.constant == 0.0) return 0.0;
    double partial = 0.0;
    for (std::size_t i = 1; i <= last_explicit; ++i)
        partial += std::pow(static_cast<double>(i), -t.exponent);
    return t.constant * (std::riemann_zeta(t.exponent) - partial);
}

}  // namespace

ContractionProfile::ContractionProfile(std::vector<double> explicit_coeffs, ProfileTail tail)
    : explicit_(std::move(explicit_coeffs)), tail_(tail) {
    for (double a : explicit_) {
        if (!(a >= 0.0) || !std::isfinite(a))
            throw DomainError("contraction profile: coefficients must be finite and nonnegative");
    }
    const std::size_t L = explicit_.size();
    double tail_sum = 0.0;
    double tail_max = 0.0;
    if (const auto* g = std::get_if<GeometricTail>(&tail_)) {
        if (!(g->first >= 0.0) || !(g->ratio >= 0.0 && g->ratio < 1.0))
            throw DomainError("contraction profile: geometric tail needs first >= 0, ratio in [0,1)");
        tail_sum = g->first / (1.0 - g->ratio);
        tail_max = g->first;
    } else if (const auto* p = std::get_if<PowerTail>(&tail_)) {
        if (!(p->exponent > 1.0) || !(p->constant >= 0.0))
            throw DomainError("contraction profile: power tail needs exponent > 1, constant >= 0");
        tail_sum = power_tail_sum(*p, L);
        tail_max = p->constant * std::pow(static_cast<double>(L + 1), -p->exponent);
    }
    total_sum_ = std::accumulate(explicit_.begin(), explicit_.end(), 0.0) + tail_sum;
    max_coeff_ = explicit_.empty() ? tail_max
                                   : std::max(*std::max_element(explicit_.begin(), explicit_.end()),
                                              tail_max);
    if (!(total_sum_ < 1.0 - kContractionMargin))
        throw CertificateViolation("contraction profile: sum of coefficients " +
                                       std::to_string(total_sum_) + " is not < 1",
                                   total_sum_);
}

ContractionProfile ContractionProfile::geometric(double first, double ratio) {
    return ContractionProfile({}, GeometricTail{first, ratio});
}

double ContractionProfile::coefficient(std::size_t i) const {
    if (i == 0) return 0.0;
    if (i <= explicit_.size()) return explicit_[i - 1];
    const std::size_t j = i - explicit_.size();
    if (const auto* g = std::get_if<GeometricTail>(&tail_))
        return g->first * std::pow(g->ratio, static_cast<double>(j - 1));
    if (const auto* p = std::get_if<PowerTail>(&tail_))
        return p->constant * std::pow(static_cast<double>(i), -p->exponent);
    return 0.0;
}

std::vector<double> ContractionProfile::leading(std::size_t count) const {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = coefficient(i + 1);
    return out;
}

double ContractionProfile::tail_sum_beyond(std::size_t index) const {
    // sum_{i > index} a_i
    double head = 0.0;
    for (std::size_t i = 1; i <= std::min(index, explicit_.size()); ++i) head += explicit_[i - 1];
    if (index <= explicit_.size()) return std::max(0.0, total_sum_ - head);
    const std::size_t j = index - explicit_.size();
    if (const auto* g = std::get_if<GeometricTail>(&tail_))
        return g->first * std::pow(g->ratio, static_cast<double>(j)) / (1.0 - g->ratio);
    if (const auto* p = std::get_if<PowerTail>(&tail_)) return power_tail_sum(*p, index);
    return 0.0;
}

bool ContractionProfile::non_increasing(std::size_t count) const {
    double prev = coefficient(1);
    for (std::size_t i = 2; i <= count; ++i) {
        const double a = coefficient(i);
        if (a > prev) return false;
        prev = a;
    }
    return true;
}

double LipschitzTable::at(std::size_t k, std::size_t i) const {
    if (k >= n_ || i < k || i >= n_) throw DomainError("lipschitz table: index out of range");
    return rows_[k][i - k];
}

double LipschitzTable::increment_weight(std::size_t k) const {
    if (k < 1 || k > n_) throw DomainError("lipschitz table: increment index out of range");
    return diagonal_[n_ - k];
}

std::vector<double> LipschitzTable::increment_weights() const {
    std::vector<double> w(n_);
    for (std::size_t k = 1; k <= n_; ++k) w[k - 1] = diagonal_[n_ - k];
    return w;
}

LipschitzTable build_lipschitz_table(const ContractionProfile& profile, std::size_t n) {
    if (n == 0) throw DomainError("lipschitz table: horizon must be >= 1");
    // Only a_1 .. a_{n-1} ever enter the recursion.
    const std::vector<double> a = profile.leading(n);  // a[j] = a_{j+1}
    LipschitzTable t;
    t.n_ = n;
    t.rows_.resize(n);
    t.diagonal_.resize(n);
    t.rows_[0].assign(n, 1.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto& row = t.rows_[k];
        const double akk = row[0];
        auto& next = t.rows_[k + 1];
        next.resize(n - k - 1);
        for (std::size_t i = k + 1; i < n; ++i)
            next[i - k - 1] = row[i - k] + akk * a[i - k - 1];
    }
    for (std::size_t k = 0; k < n; ++k) t.diagonal_[k] = t.rows_[k][0];
    return t;
}

double diagonal_uniform_bound(const ContractionProfile& profile) {
    return (1.0 + profile.max_coeff()) / (1.0 - profile.total_sum());
}

DiagonalCheck check_diagonal(const ContractionProfile& profile, const LipschitzTable& table) {
    DiagonalCheck c;
    const auto& d = table.diagonal();
    c.max_diagonal = *std::max_element(d.begin(), d.end());
    c.uniform_bound = diagonal_uniform_bound(profile);
    if (!profile.non_increasing(table.horizon())) {
        std::cerr << "imdev: profile is not non-increasing; diagonal monotonicity and uniform "
                     "bound checks skipped\n";
        return c;
    }
    c.checked = true;
    for (std::size_t k = 1; k < d.size(); ++k)
        if (d[k] < d[k - 1]) c.monotone = false;
    c.within_uniform_bound = c.max_diagonal <= c.uniform_bound;
    return c;
}

}  // namespace imdev

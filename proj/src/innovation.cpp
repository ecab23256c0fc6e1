#include "imdev/innovation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "imdev/errors.hpp"

namespace imdev {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

InnovationLaw::InnovationLaw(Kind kind) : kind_(kind) {
    std::visit(overloaded{
                   [](const Gaussian& g) {
                       if (!(g.std > 0.0) || !std::isfinite(g.mean))
                           throw DomainError("gaussian innovation needs std > 0");
                   },
                   [](const Uniform& u) {
                       if (!(u.lo < u.hi)) throw DomainError("uniform innovation needs lo < hi");
                   },
                   [](const Rademacher&) {},
                   [](const TwoPoint& t) {
                       if (!(t.p >= 0.0 && t.p <= 1.0))
                           throw DomainError("two_point innovation needs p in [0,1]");
                   },
                   [](const Laplace& l) {
                       if (!(l.scale > 0.0)) throw DomainError("laplace innovation needs scale > 0");
                   },
               },
               kind_);
}

std::string InnovationLaw::name() const {
    return std::visit(overloaded{
                          [](const Gaussian&) { return std::string("gaussian"); },
                          [](const Uniform&) { return std::string("uniform"); },
                          [](const Rademacher&) { return std::string("rademacher"); },
                          [](const TwoPoint&) { return std::string("two_point"); },
                          [](const Laplace&) { return std::string("laplace"); },
                      },
                      kind_);
}

double InnovationLaw::sample(CounterStream& rng) const {
    return std::visit(overloaded{
                          [&](const Gaussian& g) { return g.mean + g.std * rng.normal(); },
                          [&](const Uniform& u) { return u.lo + (u.hi - u.lo) * rng.uniform(); },
                          [&](const Rademacher&) { return rng.uniform() < 0.5 ? 1.0 : -1.0; },
                          [&](const TwoPoint& t) {
                              return rng.uniform() < t.p ? t.value_a : t.value_b;
                          },
                          [&](const Laplace& l) {
                              const double u = rng.uniform() - 0.5;
                              const double s = u < 0 ? -1.0 : 1.0;
                              return -l.scale * s * std::log1p(-2.0 * std::abs(u));
                          },
                      },
                      kind_);
}

double InnovationLaw::dominating_g(double y) const {
    return std::visit(
        overloaded{
            [&](const Gaussian& g) {
                const double z = y - g.mean;
                const double s = g.std;
                return s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-z * z / (2.0 * s * s)) +
                       z * (1.0 - 2.0 * standard_normal_cdf(-z / s));
            },
            [&](const Uniform& u) {
                if (y <= u.lo || y >= u.hi) return std::abs(y - 0.5 * (u.lo + u.hi));
                const double l = y - u.lo, r = u.hi - y;
                return (l * l + r * r) / (2.0 * (u.hi - u.lo));
            },
            [&](const Rademacher&) { return 0.5 * std::abs(y - 1.0) + 0.5 * std::abs(y + 1.0); },
            [&](const TwoPoint& t) {
                return t.p * std::abs(y - t.value_a) + (1.0 - t.p) * std::abs(y - t.value_b);
            },
            [&](const Laplace& l) { return std::abs(y) + l.scale * std::exp(-std::abs(y) / l.scale); },
        },
        kind_);
}

double InnovationLaw::mean() const {
    return std::visit(overloaded{
                          [](const Gaussian& g) { return g.mean; },
                          [](const Uniform& u) { return 0.5 * (u.lo + u.hi); },
                          [](const Rademacher&) { return 0.0; },
                          [](const TwoPoint& t) { return t.p * t.value_a + (1 - t.p) * t.value_b; },
                          [](const Laplace&) { return 0.0; },
                      },
                      kind_);
}

bool InnovationLaw::bounded() const {
    return !std::holds_alternative<Gaussian>(kind_) && !std::holds_alternative<Laplace>(kind_);
}

std::pair<double, double> InnovationLaw::support() const {
    return std::visit(
        overloaded{
            [](const Gaussian&) { return std::pair{-HUGE_VAL, HUGE_VAL}; },
            [](const Laplace&) { return std::pair{-HUGE_VAL, HUGE_VAL}; },
            [](const Uniform& u) { return std::pair{u.lo, u.hi}; },
            [](const Rademacher&) { return std::pair{-1.0, 1.0}; },
            [](const TwoPoint& t) {
                if (t.p == 1.0) return std::pair{t.value_a, t.value_a};
                if (t.p == 0.0) return std::pair{t.value_b, t.value_b};
                return std::pair{std::min(t.value_a, t.value_b), std::max(t.value_a, t.value_b)};
            },
        },
        kind_);
}

std::optional<std::vector<std::pair<double, double>>> InnovationLaw::atoms() const {
    if (std::holds_alternative<Rademacher>(kind_))
        return std::vector<std::pair<double, double>>{{-1.0, 0.5}, {1.0, 0.5}};
    if (const auto* t = std::get_if<TwoPoint>(&kind_)) {
        std::vector<std::pair<double, double>> out;
        if (t->p > 0.0) out.emplace_back(t->value_a, t->p);
        if (t->p < 1.0) out.emplace_back(t->value_b, 1.0 - t->p);
        return out;
    }
    return std::nullopt;
}

std::optional<double> InnovationLaw::g_essential_sup() const {
    if (!bounded()) return std::nullopt;
    const auto [lo, hi] = support();
    return std::max(dominating_g(lo), dominating_g(hi));
}

std::optional<double> InnovationLaw::increment_range() const {
    if (!bounded()) return std::nullopt;
    const auto [lo, hi] = support();
    return hi - lo;
}

LagLaw::LagLaw(std::vector<double> pmf, double truncated_mass)
    : pmf_(std::move(pmf)), truncated_mass_(truncated_mass) {
    if (!(truncated_mass >= 0.0 && truncated_mass < 1.0)) throw DomainError("lag law: invalid truncated mass");
    if (pmf_.empty()) throw DomainError("lag law: empty pmf");
    double total = 0.0;
    for (double p : pmf_) {
        if (!(p >= 0.0)) throw DomainError("lag law: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw DomainError("lag law: probabilities must sum to 1");
    finalize();
}

LagLaw LagLaw::degenerate(std::size_t lag) {
    if (lag == 0) throw DomainError("lag law: lags are positive");
    std::vector<double> pmf(lag, 0.0);
    pmf.back() = 1.0;
    return LagLaw(std::move(pmf));
}

LagLaw LagLaw::uniform(std::size_t max_lag) {
    if (max_lag == 0) throw DomainError("lag law: lags are positive");
    return LagLaw(std::vector<double>(max_lag, 1.0 / static_cast<double>(max_lag)));
}

LagLaw LagLaw::geometric(double q) {
    if (!(q >= 0.0 && q < 1.0)) throw DomainError("lag law: geometric q must be in [0,1)");
    std::vector<double> pmf;
    double survivor = 1.0;  // P(J > j)
    double p = 1.0 - q;
    while (survivor > kTruncationQuantile) {
        pmf.push_back(p);
        survivor -= p;
        p *= q;
    }
    LagLaw law;
    law.truncated_mass_ = std::max(0.0, survivor);
    const double kept = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    for (double& v : pmf) v /= kept;
    law.pmf_ = std::move(pmf);
    law.finalize();
    return law;
}

void LagLaw::finalize() {
    while (pmf_.size() > 1 && pmf_.back() == 0.0) pmf_.pop_back();
    cdf_.resize(pmf_.size());
    std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
    cdf_.back() = 1.0;
}

double LagLaw::prob(std::size_t j) const {
    return (j >= 1 && j <= pmf_.size()) ? pmf_[j - 1] : 0.0;
}

double LagLaw::prob_at_least(std::size_t j) const {
    if (j <= 1) return 1.0;
    double s = 0.0;
    for (std::size_t i = j; i <= pmf_.size(); ++i) s += pmf_[i - 1];
    return s;
}

bool LagLaw::is_degenerate() const {
    return std::count_if(pmf_.begin(), pmf_.end(), [](double p) { return p > 0.0; }) == 1;
}

std::size_t LagLaw::sample(CounterStream& rng) const {
    if (pmf_.size() == 1) {
        (void)rng.uniform();  // keep the per-draw consumption fixed
        return 1;
    }
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1)) + 1;
}

}  // namespace imdev

#include "imdev/functional.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "imdev/errors.hpp"
#include "imdev/rng.hpp"

namespace imdev {

std::string to_string(FunctionalSpec::Kind k) {
    switch (k) {
        case FunctionalSpec::Kind::sum: return "sum";
        case FunctionalSpec::Kind::sum_abs: return "sum_abs";
        case FunctionalSpec::Kind::sum_clipped: return "sum_clipped";
        case FunctionalSpec::Kind::max: return "max";
    }
    return "unknown";
}

FunctionalSpec::Kind functional_kind_from_string(const std::string& s) {
    using K = FunctionalSpec::Kind;
    for (K k : {K::sum, K::sum_abs, K::sum_clipped, K::max})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown functional '" + s + "'");
}

FunctionalSpec::FunctionalSpec(Kind kind, double clip) : kind_(kind), clip_(clip) {
    if (kind_ == Kind::sum_clipped && !(clip_ > 0.0))
        throw DomainError("sum_clipped functional needs a positive clip level");
    // |f(x) - f(x')| <= sum |x_i - x'_i| on random single and multi-coordinate moves.
    CounterStream rng(0x11f, StreamPurpose::generic, static_cast<std::uint64_t>(kind_), 0);
    std::array<double, 8> x{}, y{};
    for (int trial = 0; trial < 64; ++trial) {
        double dist = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = 6.0 * (rng.uniform() - 0.5);
            y[i] = (rng.uniform() < 0.5) ? x[i] : x[i] + 4.0 * (rng.uniform() - 0.5);
            dist += std::abs(x[i] - y[i]);
        }
        if (std::abs((*this)(x) - (*this)(y)) > dist * (1.0 + 1e-12) + 1e-12)
            throw DomainError("functional '" + name() + "' is not separately 1-Lipschitz");
    }
}

std::string FunctionalSpec::name() const { return to_string(kind_); }

double FunctionalSpec::operator()(std::span<const double> x) const {
    switch (kind_) {
        case Kind::sum: {
            double s = 0.0;
            for (double v : x) s += v;
            return s;
        }
        case Kind::sum_abs: {
            double s = 0.0;
            for (double v : x) s += std::abs(v);
            return s;
        }
        case Kind::sum_clipped: {
            double s = 0.0;
            for (double v : x) s += std::clamp(v, -clip_, clip_);
            return s;
        }
        case Kind::max: return x.empty() ? 0.0 : *std::max_element(x.begin(), x.end());
    }
    return 0.0;
}

}  // namespace imdev

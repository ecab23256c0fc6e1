#pragma once

#include <span>
#include <string>

namespace imdev {

// Separately 1-Lipschitz functionals of (x_1, ..., x_n) under d = |.|.
class FunctionalSpec {
public:
    enum class Kind { sum, sum_abs, sum_clipped, max };

    FunctionalSpec() = default;
    // Validates the per-coordinate Lipschitz constant by random perturbation.
    explicit FunctionalSpec(Kind kind, double clip = 1.0);

    Kind kind() const noexcept { return kind_; }
    double clip() const noexcept { return clip_; }
    std::string name() const;

    double operator()(std::span<const double> x) const;

private:
    Kind kind_ = Kind::sum;
    double clip_ = 1.0;
};

FunctionalSpec::Kind functional_kind_from_string(const std::string& s);
std::string to_string(FunctionalSpec::Kind k);

}  // namespace imdev

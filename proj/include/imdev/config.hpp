#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imdev/bounds.hpp"
#include "imdev/functional.hpp"
#include "imdev/monte_carlo.hpp"
#include "imdev/process.hpp"

namespace imdev {

inline constexpr int kSchemaVersion = 1;

struct XGridSpec {
    enum class Spacing { linear, log };
    enum class Units { absolute, sqrt_v };  // sqrt_v: multiples of sqrt(V)

    std::vector<double> values;  // explicit list; overrides the range when non-empty
    std::size_t count = 12;
    double lo = 0.5;
    double hi = 6.0;
    Spacing spacing = Spacing::linear;
    Units units = Units::sqrt_v;

    std::vector<double> materialize(double sqrt_v) const;
};

struct BoundRequest {
    BoundKind kind = BoundKind::bernstein;
    std::optional<DominatingSpec> dominating;  // given analytically
    DominatingRequest estimate;                // used when `dominating` is absent
};

struct ExperimentConfig {
    ProcessSpec process;
    FunctionalSpec functional;
    std::size_t n = 200;
    std::size_t replicates = 100000;
    std::uint64_t seed = 1;
    XGridSpec x_grid;
    std::vector<BoundRequest> bounds;
    std::string out_dir = "out";
    double ci_level = 0.999;
};

}  // namespace imdev

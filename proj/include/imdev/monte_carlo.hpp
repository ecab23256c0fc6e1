#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imdev/bounds.hpp"
#include "imdev/coefficients.hpp"
#include "imdev/functional.hpp"
#include "imdev/process.hpp"

namespace imdev {

// 0 -> $IMDEV_THREADS if set, else hardware concurrency.
std::size_t resolve_threads(std::size_t requested);

// Calls body(begin, end) over fixed blocks of [0, count). Work items must
// write only to their own indices; results are then schedule-independent.
void parallel_blocks(std::size_t count, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t)>& body,
                     std::size_t block_size = 512);

// f(X_1..X_n) for replicates [first, first + count).
std::vector<double> sample_functional(const ProcessModel& model, const FunctionalSpec& f, std::size_t n,
                                      std::uint64_t first, std::size_t count, std::uint64_t seed,
                                      std::size_t threads = 0);

struct WilsonInterval {
    double lower = 0.0;
    double upper = 1.0;
};
WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double level);
double normal_quantile(double p);

struct EmpiricalEstimate {
    std::vector<double> x_grid;
    Side side = Side::upper;
    std::vector<double> tail_freq;
    std::vector<double> lower_ci;
    std::vector<double> upper_ci;
    std::vector<std::size_t> counts;
    double ci_level = 0.999;
    std::size_t replicates = 0;        // main batch
    std::size_t pilot_replicates = 0;
    double center = 0.0;               // pilot estimate of E f
    double center_se = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t spec_digest = 0;
    std::size_t truncation_events = 0;
};

struct TailOptions {
    Side side = Side::upper;  // upper: S >= x, lower: -S >= x, two_sided: |S| >= x
    double ci_level = 0.999;
    std::size_t threads = 0;
};

// Pilot batch = first half of the replicate indices, main batch = the rest.
EmpiricalEstimate empirical_tail(const ProcessSpec& spec, const FunctionalSpec& f, std::size_t n,
                                 const std::vector<double>& x_grid, std::size_t replicates, std::uint64_t seed,
                                 const TailOptions& options = {});

// Tail counts on an existing set of centered values.
// Upper and |S| tails from one shared sample.
struct TailPair {
    EmpiricalEstimate upper;
    EmpiricalEstimate two_sided;
};
TailPair empirical_tail_pair(const ProcessSpec& spec, const FunctionalSpec& f, std::size_t n,
                             const std::vector<double>& x_grid, std::size_t replicates, std::uint64_t seed,
                             double ci_level = 0.999, std::size_t threads = 0);

EmpiricalEstimate tail_from_samples(const std::vector<double>& centered, const std::vector<double>& x_grid,
                                    Side side, double ci_level);

struct MomentEstimate {
    double p = 2.0;
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.99;
    std::size_t replicates = 0;
    std::size_t resamples = 0;
};

// ||f - E f||_p with a percentile bootstrap interval.
MomentEstimate empirical_moment(const ProcessSpec& spec, const FunctionalSpec& f, std::size_t n, double p,
                                std::size_t replicates, std::uint64_t seed, double level = 0.99,
                                std::size_t threads = 0, std::size_t resamples = 200);
MomentEstimate moment_from_samples(const std::vector<double>& values, double p, std::uint64_t seed,
                                   double level = 0.99, std::size_t resamples = 200);

struct WeakNorm {
    double estimate = 0.0;
    double upper = 0.0;
};
// sup over sample points x of x^p * #{Z >= x}/N; the upper value replaces the
// empirical frequency by its Wilson upper limit.
WeakNorm estimate_weak_norm(std::vector<double> samples, double p, double level = 0.99);

// Which dominating variable feeds a bound: G (needs the innovation-Lipschitz condition) or the
// past-dependent H.
enum class Route { g, h };
std::string to_string(Route r);
Route route_for(BoundKind kind);

// Table built from the profile appropriate to the route.
LipschitzTable table_for(const ProcessSpec& spec, Route route, std::size_t n);

struct DominatingRequest {
    DominatingKind kind = DominatingKind::bounded;
    std::optional<Route> route;  // default: G when the innovation-Lipschitz condition holds, else H
    double t0 = 1.0;
    double p = 2.0;
    double alpha = 0.5;
    std::size_t samples = 20000;
    double ci_level = 0.99;
    std::size_t threads = 0;
};

// Constants with provenance; Monte-Carlo values use the upper limit of the
// stated confidence level.
DominatingSpec estimate_dominating_constants(const ProcessSpec& spec, std::size_t n, const DominatingRequest& req,
                                             std::uint64_t seed);

// Upper-CI estimate of ||max_k a_{n-k}(n-k) G_k||_p (strong) or its weak p-th
// power (weak = true).
double estimate_max_weighted_norm(const ProcessSpec& spec, const LipschitzTable& table, double p, bool weak,
                                  std::size_t samples, std::uint64_t seed, double level = 0.99,
                                  std::size_t threads = 0);

struct ThresholdCheck {
    double x = 0.0;
    double x_effective = 0.0;  // x - 3 SE(pilot)
    double empirical = 0.0;
    double empirical_lower = 0.0;
    double empirical_upper = 0.0;
    double bound = 1.0;
    bool pass = false;        // empirical upper CI <= bound
    bool consistent = false;  // empirical lower CI <= bound (no significant violation)
    bool bound_valid = true;
};

struct VerificationReport {
    std::string bound_kind;
    Route route = Route::g;
    Side side = Side::upper;
    std::vector<ThresholdCheck> checks;
    double coverage = 0.0;
    double consistency = 0.0;
    std::map<std::string, double> aggregates;
    std::vector<std::string> flags;
    DominatingSpec dominating;
    std::uint64_t spec_digest = 0;
    std::uint64_t seed = 0;
    std::size_t replicates = 0;
    double ci_level = 0.999;
};

VerificationReport compare_bound(const EmpiricalEstimate& upper_tail, const EmpiricalEstimate& abs_tail,
                                 BoundKind kind, const DominatingSpec& dominating, const LipschitzTable& table,
                                 const std::vector<std::string>& spec_flags = {});

VerificationReport verify_bound(const ProcessSpec& spec, const FunctionalSpec& f, std::size_t n, BoundKind kind,
                                const DominatingSpec& dominating, const std::vector<double>& x_grid,
                                std::size_t replicates, std::uint64_t seed, const TailOptions& options = {});

// Flags attached to every output for the process (experimental profile,
// conditioning on lags, lag-law truncation).
std::vector<std::string> spec_flags(const ProcessSpec& spec, Route route);

}  // namespace imdev

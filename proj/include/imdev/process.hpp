#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imdev/coefficients.hpp"
#include "imdev/innovation.hpp"
#include "imdev/rng.hpp"

namespace imdev {

enum class Family {
    random_memory_ar,     // X_t = sum_{i<=J_t} a_i X_{t-i} + xi_t
    step_reinforced_erw,  // X_n = gamma_n X_{eta_n} + (1 - |gamma_n|) xi_n
    mean_field_memory,    // X_t = r(sum_i a_i X_{t-i}) + xi_t
    memory_one_infinite,  // X_t = a_{J_t} X_{t-J_t} + xi_t
    arch_type,            // X_t = sqrt(sum_i a_i^2 X_{t-i}^2 + b^2) * eps_t
};

std::string to_string(Family f);
Family family_from_string(const std::string& s);

// Signed coefficients a_1..a_L with an optional geometric continuation
// a_{L+j} = first * ratio^(j-1).
struct CoefficientSequence {
    std::vector<double> values;
    std::optional<GeometricTail> tail;

    double at(std::size_t i) const;  // 1-based
    // Smallest count beyond which the absolute tail sums to < 1e-12.
    std::size_t effective_length() const;
    ContractionProfile scaled_abs_profile(double scale) const;
};

// 1-Lipschitz response maps for the mean-field family; r(0) = 0 for all.
struct Response {
    enum class Kind { identity, tanh_scaled, clipped_linear };
    Kind kind = Kind::identity;
    double scale = 1.0;  // s in s*tanh(u/s), or the clip level

    double operator()(double u) const;
    double lipschitz() const noexcept { return 1.0; }
};

std::string to_string(Response::Kind k);
Response::Kind response_from_string(const std::string& s);

struct InitialPast {
    enum class Kind { zeros, constant, burn_in };
    Kind kind = Kind::zeros;
    double value = 0.0;
    std::size_t steps = 0;
};

struct ErwParams {
    double t = 0.5;  // probability of a fresh step, in (0, 1]
    double p = 0.5;  // memory parameter, in [0, 1]
};

struct ProcessSpec {
    Family family = Family::memory_one_infinite;
    CoefficientSequence coefficients;
    LagLaw lag_law;
    Response response;
    double arch_floor = 1.0;  // b > 0
    ErwParams erw;
    InnovationLaw innovation;
    InitialPast initial_past;
    std::size_t memory_truncation = 0;  // 0 = chosen automatically
};

// Family-specific innovation tuple: (J, xi) for lag families, (gamma, eta, xi)
// for the ERW (eta stored as the backward lag n - eta), xi alone otherwise.
struct InnovationDraw {
    std::size_t lag = 1;
    int gamma = 0;
    double value = 0.0;
};

struct Certificate {
    ContractionProfile profile;
    bool experimental = false;
    std::string note;
};

// Validated, materialized form of a ProcessSpec.
class ProcessModel {
public:
    explicit ProcessModel(ProcessSpec spec);
    // Skips the contraction certificate; for finite instances whose innovation
    // alphabets replace the spec's lag and innovation laws.
    static ProcessModel unchecked(ProcessSpec spec);

    const ProcessSpec& spec() const noexcept { return spec_; }
    std::size_t window() const noexcept { return window_; }
    const std::vector<double>& coefficients() const noexcept { return coeffs_; }
    const Certificate& certificate() const noexcept { return certificate_; }
    std::uint64_t digest() const noexcept { return digest_; }

    InnovationDraw draw(std::size_t t, CounterStream& rng) const;

    // past[0] = X_{t-1}, past[1] = X_{t-2}, ...; for the ERW the window is
    // exactly the in-horizon history X_{t-1}..X_1.
    double step(std::span<const double> past, const InnovationDraw& d,
                std::size_t* truncations = nullptr) const;

    // E'|F(past; e) - F(past; e')| for an independent copy e'.
    double h_value(std::span<const double> past, const InnovationDraw& d) const;

    // Fills out[0..n) with X_1..X_n for the given replicate; returns the
    // number of lag-truncation events.
    std::size_t simulate_into(std::uint64_t seed, std::uint64_t replicate, std::span<double> out,
                              std::vector<double>& scratch) const;

    // Same as simulate_into but also records H_k (past-dependent dominating
    // variable) for k = 1..n.
    std::size_t simulate_with_h(std::uint64_t seed, std::uint64_t replicate, std::span<double> out,
                                std::span<double> h_out, std::vector<double>& scratch) const;

private:
    ProcessModel(ProcessSpec spec, bool check);

    template <class OnStep>
    std::size_t run(std::uint64_t seed, std::uint64_t replicate, std::size_t n,
                    std::vector<double>& scratch, OnStep&& on_step) const;

    ProcessSpec spec_;
    std::size_t window_ = 0;
    std::vector<double> coeffs_;  // a_1..a_window
    Certificate certificate_;
    std::uint64_t digest_ = 0;
};

struct Trajectory {
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::uint64_t spec_digest = 0;
    std::size_t truncation_events = 0;
};

double step(const ProcessSpec& spec, std::span<const double> past, const InnovationDraw& draw);
Trajectory simulate(const ProcessSpec& spec, std::size_t n, std::uint64_t seed);

Certificate contraction_certificate(const ProcessSpec& spec);

// Whether |F(x; e) - F(x; e')| <= |xi - xi'| holds, possibly after
// conditioning on the lag sequence.
bool supports_c2(const ProcessSpec& spec);

struct DominationProfile {
    ContractionProfile profile;
    // The lag sequence is conditioned on; the profile is sup over lags.
    bool conditional_on_lags = false;
};

// Profile used with G-based bounds. Throws UnsupportedError when the innovation-Lipschitz condition fails.
DominationProfile domination_profile(const ProcessSpec& spec);

// G(e) for a fresh innovation draw.
double dominating_sample(const ProcessSpec& spec, std::uint64_t seed);

struct MeanWithError {
    double mean = 0.0;
    double standard_error = 0.0;
};

MeanWithError coupled_discrepancy(const ProcessSpec& spec, std::span<const double> past_a,
                                  std::span<const double> past_b, std::size_t draws,
                                  std::uint64_t seed);

// Row coefficients (1-t)/(n-1) of the step-reinforced ERW at time n.
std::vector<double> erw_row_coefficients(double t, std::size_t n);

}  // namespace imdev

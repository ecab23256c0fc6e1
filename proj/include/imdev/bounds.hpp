#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imdev/coefficients.hpp"

namespace imdev {

enum class DominatingKind { bernstein, subgaussian, cramer, semiexp_g, semiexp_h, bounded, pth_moment, weak_pth };

std::string to_string(DominatingKind k);
DominatingKind dominating_kind_from_string(const std::string& s);

struct Provenance {
    enum class Source { analytic, mc_upper_ci };
    Source source = Source::analytic;
    double level = 0.0;
    std::size_t samples = 0;
};

// Constants entering the bounds. Which fields are read depends on `kind`:
//   bernstein   M, V            subgaussian  epsilon, V (= E[H^2])
//   cramer      t0, K           semiexp_g    p, K
//   semiexp_h   alpha, C1       bounded      M, V, Mk (increment ranges)
//   pth_moment  p, A, V         weak_pth     p, A (weak moments), V, max_norm
struct DominatingSpec {
    DominatingKind kind = DominatingKind::bounded;
    double M = 0.0;
    double epsilon = 0.0;
    double t0 = 0.0;
    double p = 0.0;
    double alpha = 0.0;
    double C1 = 0.0;
    double max_norm = 0.0;  // ||max_k a_{n-k}(n-k) G_k|| (strong or weak, to the p-th power for weak)
    std::vector<double> V;
    std::vector<double> K;
    std::vector<double> Mk;
    std::vector<double> A;
    std::map<std::string, Provenance> provenance;
    std::vector<std::string> flags;  // e.g. "experimental", "trajectory_dependent"

    void validate(std::size_t n) const;
};

enum class Side { upper, lower, two_sided };
std::string to_string(Side s);
Side side_from_string(const std::string& s);

struct TailBound {
    std::string kind;
    double x = 0.0;
    double value = 1.0;  // reported probability, clamped to [0, 1]
    double raw = 1.0;    // unclamped one-sided (or natively two-sided) value
    std::optional<double> looser;  // unclamped looser companion form
    Side side = Side::upper;
    bool native_two_sided = false;
    std::map<std::string, double> aggregates;
    bool valid = true;
    std::string reason;  // set when !valid
    bool clamped = false;
    std::vector<std::string> notes;
};

// sum_k (a_{n-k}(n-k))^2 V_k
double aggregate_v(const LipschitzTable& table, const std::vector<double>& v);
// sum_k (a_{n-k}(n-k))^p c_k
double weighted_power_sum(const LipschitzTable& table, const std::vector<double>& c, double p);

// Exponential-Markov exponent -t x + t^2 V / (2 (1 - t delta)).
double bernstein_exponent(double t, double x, double v, double delta);
double bernstein_optimal_t(double x, double v, double delta);
TailBound bernstein_bound(double x, double v, double delta, Side side = Side::upper);
TailBound bernstein_bound(const DominatingSpec& spec, const LipschitzTable& table, double x,
                          Side side = Side::upper);

// x is measured in units of V_n; r = epsilon a_{n-1}(n-1) / sigma_n.
TailBound subgaussian_bound(double x, double r, Side side = Side::upper);
TailBound subgaussian_bound(const DominatingSpec& spec, const LipschitzTable& table, double x,
                            Side side = Side::upper);

// -t x + t^2 K delta^-2 / (1 - t / delta)
double cramer_exponent(double t, double x, double k, double delta);
double cramer_optimal_t(double x, double k, double delta);
TailBound cramer_bound(double x, double k, double delta, Side side = Side::upper);
TailBound cramer_bound(const DominatingSpec& spec, const LipschitzTable& table, double x,
                       Side side = Side::upper);

// a = a_{n-1}(n-1)
TailBound semiexp_g_bound(double x, double k, double a, double p, Side side = Side::upper);
TailBound semiexp_g_bound(const DominatingSpec& spec, const LipschitzTable& table, double x,
                          Side side = Side::upper);
// Case-split form valid for every K > 0; bounds P(S_n >= x).
double semiexp_g_two_regime(double x, double k, double a, double p);

double semiexp_h_constant(double alpha, double x, double a, double c1);
// Bounds P(S_n >= n x).
TailBound semiexp_h_bound(double x_per_step, std::size_t n, double a, double alpha, double c1,
                          Side side = Side::upper);
TailBound semiexp_h_bound(const DominatingSpec& spec, const LipschitzTable& table, double x_per_step,
                          Side side = Side::upper);

TailBound fuk_nagaev_truncated(double x, double y, double v, double a, std::size_t n, double tail_of_max,
                               Side side = Side::upper);
TailBound fuk_nagaev_truncated(const DominatingSpec& spec, const LipschitzTable& table, double x, double y,
                               double tail_of_max, Side side = Side::upper);

TailBound hoeffding_bound(double x, double m, double v, double a, std::size_t n, Side side = Side::upper);
TailBound hoeffding_bound(const DominatingSpec& spec, const LipschitzTable& table, double x,
                          Side side = Side::upper);

// Two-sided by construction: bounds P(|S_n| >= x).
TailBound fuk_nagaev_pth(double x, double p, double a_p, double v);
TailBound fuk_nagaev_pth(const DominatingSpec& spec, const LipschitzTable& table, double x);

struct McDiarmidForms {
    double ell_star_form = 1.0;
    double product_form = 1.0;
    double classical_form = 1.0;
};
McDiarmidForms mcdiarmid_forms(double x, double d, double m2);
TailBound mcdiarmid_bound(double x, double d, double m2, Side side = Side::upper);
TailBound mcdiarmid_bound(const DominatingSpec& spec, const LipschitzTable& table, double x,
                          Side side = Side::upper);

// A(n, p) = A_1 a_{n-1}(n-1)^p + 2^{2-p} sum_{k>=2} a_{n-k}(n-k)^p A_k
double vbe_aggregate(const LipschitzTable& table, const std::vector<double>& a, double p);
double von_bahr_esseen(const LipschitzTable& table, const std::vector<double>& a, double p);
TailBound vbe_tail(double x, double a_np, double p);
TailBound vbe_tail(const DominatingSpec& spec, const LipschitzTable& table, double x);

double weak_vbe_constant(double p);
TailBound weak_vbe_tail(double x, double b, double p);
TailBound weak_vbe_tail(const DominatingSpec& spec, const LipschitzTable& table, double x);

double mz_aggregate(const LipschitzTable& table, const std::vector<double>& a, double p);
double mz_norm_bound(const LipschitzTable& table, const std::vector<double>& a, double p);

struct RosenthalResult {
    double value = 0.0;
    double c = 1.0;
    double c1 = 0.0;
    double c2 = 0.0;
    bool constant_uncertain = false;
};
double rosenthal_c1(double c);
double rosenthal_c2(double c, double p);
RosenthalResult rosenthal_bound(double v, double max_norm, double p);
// weak_max_p = ||max_k a_{n-k}(n-k) G_k||_{w,p}^p. Bounds P(|S_n| >= x).
RosenthalResult weak_rosenthal_tail(double x, double v, double weak_max_p, double p);
TailBound weak_rosenthal_bound(const DominatingSpec& spec, const LipschitzTable& table, double x);

enum class BoundKind {
    bernstein,
    subgaussian,
    cramer,
    semiexp_g,
    semiexp_h,
    fuk_nagaev_truncated,
    hoeffding,
    fuk_nagaev_pth,
    mcdiarmid,
    vbe,
    weak_vbe,
    weak_rosenthal,
};

std::string to_string(BoundKind k);
BoundKind bound_kind_from_string(const std::string& s);
// Dominating-constant kind each bound reads.
DominatingKind required_dominating_kind(BoundKind k);
// Whether the bound is G-based (needs the innovation-Lipschitz condition) rather than H-based.
bool bound_needs_c2(BoundKind k);

// Evaluates a bound at threshold s on S_n itself, converting to the bound's
// native units (x V_n for subgaussian, n x for semiexp_h).
TailBound evaluate_bound(BoundKind kind, const DominatingSpec& spec, const LipschitzTable& table, double s,
                         Side side = Side::upper);

}  // namespace imdev

#include "imdev/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "imdev/errors.hpp"
#include "imdev/special_functions.hpp"

namespace imdev {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lead_weight(const LipschitzTable& table) { return table.increment_weight(1); }

void check_length(const LipschitzTable& table, const std::vector<double>& v, const char* who) {
    if (v.size() != table.horizon())
        throw DomainError(std::string(who) + ": expected " + std::to_string(table.horizon()) +
                          " per-step constants, got " + std::to_string(v.size()));
}

std::vector<double> broadcast(const std::vector<double>& v, std::size_t n, const char* field) {
    if (v.size() == n) return v;
    if (v.size() == 1) return std::vector<double>(n, v.front());
    throw DomainError(std::string("dominating constants: field ") + field + " needs 1 or " + std::to_string(n) +
                      " entries, got " + std::to_string(v.size()));
}

void finalize(TailBound& b, Side side) {
    b.side = side;
    double v = b.raw;
    if (side == Side::two_sided && !b.native_two_sided) v = 2.0 * v;
    if (!(v <= 1.0)) {
        v = 1.0;
        b.clamped = true;
    }
    if (v < 0.0) v = 0.0;
    b.value = v;
}

TailBound trivial(const std::string& kind, double x, Side side, bool native_two_sided = false) {
    TailBound b;
    b.kind = kind;
    b.x = x;
    b.raw = 1.0;
    b.looser = 1.0;
    b.native_two_sided = native_two_sided;
    b.notes.push_back("nonpositive threshold");
    finalize(b, side);
    return b;
}

TailBound out_of_domain(const std::string& kind, double x, Side side, std::string reason) {
    TailBound b;
    b.kind = kind;
    b.x = x;
    b.valid = false;
    b.reason = std::move(reason);
    b.raw = 1.0;
    finalize(b, side);
    return b;
}

void require_positive_finite(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

void require_nonneg(double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be nonnegative and finite");
}

}  // namespace

std::string to_string(DominatingKind k) {
    switch (k) {
        case DominatingKind::bernstein: return "bernstein";
        case DominatingKind::subgaussian: return "subgaussian";
        case DominatingKind::cramer: return "cramer";
        case DominatingKind::semiexp_g: return "semiexp_g";
        case DominatingKind::semiexp_h: return "semiexp_h";
        case DominatingKind::bounded: return "bounded";
        case DominatingKind::pth_moment: return "pth_moment";
        case DominatingKind::weak_pth: return "weak_pth";
    }
    return "?";
}

DominatingKind dominating_kind_from_string(const std::string& s) {
    for (auto k : {DominatingKind::bernstein, DominatingKind::subgaussian, DominatingKind::cramer,
                   DominatingKind::semiexp_g, DominatingKind::semiexp_h, DominatingKind::bounded,
                   DominatingKind::pth_moment, DominatingKind::weak_pth})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown dominating kind '" + s + "'");
}

std::string to_string(Side s) {
    switch (s) {
        case Side::upper: return "upper";
        case Side::lower: return "lower";
        case Side::two_sided: return "two_sided";
    }
    return "?";
}

Side side_from_string(const std::string& s) {
    if (s == "upper") return Side::upper;
    if (s == "lower") return Side::lower;
    if (s == "two_sided") return Side::two_sided;
    throw ConfigError("unknown side '" + s + "'");
}

void DominatingSpec::validate(std::size_t n) const {
    auto nonneg_all = [](const std::vector<double>& v, const char* what) {
        for (double x : v) require_nonneg(x, what);
    };
    auto need = [&](const std::vector<double>& v, const char* what) {
        (void)broadcast(v, n, what);
        nonneg_all(v, what);
    };
    switch (kind) {
        case DominatingKind::bernstein:
            require_nonneg(M, "M");
            need(V, "V");
            break;
        case DominatingKind::subgaussian:
            require_nonneg(epsilon, "epsilon");
            need(V, "V");
            break;
        case DominatingKind::cramer:
            require_positive_finite(t0, "t0");
            need(K, "K");
            for (double k : K)
                if (k < 1.0) throw DomainError("cramer constants require K_k >= 1");
            break;
        case DominatingKind::semiexp_g:
            if (!(p > 0.0 && p < 1.0)) throw DomainError("semiexp_g requires p in (0, 1)");
            need(K, "K");
            break;
        case DominatingKind::semiexp_h:
            if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("semiexp_h requires alpha in (0, 1)");
            require_nonneg(C1, "C1");
            break;
        case DominatingKind::bounded:
            require_nonneg(M, "M");
            need(V, "V");
            if (!Mk.empty()) need(Mk, "Mk");
            break;
        case DominatingKind::pth_moment:
            if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("pth_moment requires p >= 1");
            need(A, "A");
            if (!V.empty()) need(V, "V");
            break;
        case DominatingKind::weak_pth:
            if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("weak_pth requires p > 1");
            need(A, "A");
            if (!V.empty()) need(V, "V");
            require_nonneg(max_norm, "max_norm");
            break;
    }
}

double aggregate_v(const LipschitzTable& table, const std::vector<double>& v) {
    return weighted_power_sum(table, v, 2.0);
}

double weighted_power_sum(const LipschitzTable& table, const std::vector<double>& c, double p) {
    check_length(table, c, "weighted_power_sum");
    double s = 0.0;
    for (std::size_t k = 1; k <= c.size(); ++k) s += std::pow(table.increment_weight(k), p) * c[k - 1];
    return s;
}

// ---------------------------------------------------------------- Bernstein

double bernstein_exponent(double t, double x, double v, double delta) {
    if (t * delta >= 1.0) return kInf;
    return -t * x + t * t * v / (2.0 * (1.0 - t * delta));
}

double bernstein_optimal_t(double x, double v, double delta) {
    require_positive_finite(x, "bernstein_optimal_t: x");
    require_positive_finite(v, "bernstein_optimal_t: V");
    require_nonneg(delta, "bernstein_optimal_t: delta");
    const double u = 2.0 * x * delta / v;
    return (2.0 * x / v) / (u + 1.0 + std::sqrt(1.0 + u));
}

TailBound bernstein_bound(double x, double v, double delta, Side side) {
    require_nonneg(v, "bernstein: V");
    require_nonneg(delta, "bernstein: delta");
    if (!(x > 0.0)) return trivial("bernstein", x, side);
    TailBound b;
    b.kind = "bernstein";
    b.x = x;
    b.aggregates["V"] = v;
    b.aggregates["bernstein_scale"] = delta;
    if (v == 0.0) {
        b.raw = 0.0;
        b.looser = delta > 0.0 ? std::exp(-x / (2.0 * delta)) : 0.0;
        b.notes.push_back("degenerate variance");
    } else {
        const double u = 2.0 * x * delta / v;
        b.raw = std::exp(-x * x / (v * (1.0 + std::sqrt(1.0 + u)) + x * delta));
        b.looser = std::exp(-x * x / (2.0 * (v + x * delta)));
        b.aggregates["t_opt"] = bernstein_optimal_t(x, v, delta);
    }
    finalize(b, side);
    return b;
}

TailBound bernstein_bound(const DominatingSpec& spec, const LipschitzTable& table, double x, Side side) {
    const std::size_t n = table.horizon();
    spec.validate(n);
    const double v = aggregate_v(table, broadcast(spec.V, n, "V"));
    const double a = lead_weight(table);
    auto b = bernstein_bound(x, v, spec.M * a, side);
    b.aggregates["M"] = spec.M;
    b.aggregates["a_lead"] = a;
    return b;
}

// ------------------------------------------------------------ sub-Gaussian

TailBound subgaussian_bound(double x, double r, Side side) {
    require_nonneg(r, "subgaussian: epsilon a / sigma_n");
    if (!(x > 0.0)) return trivial("subgaussian", x, side);
    TailBound b;
    b.kind = "subgaussian";
    b.x = x;
    b.aggregates["r"] = r;
    const double xr = x * r;
    b.raw = std::exp(-x * x / (1.0 + std::sqrt(1.0 + 2.0 * xr) + xr));
    b.looser = std::exp(-x * x / (2.0 * (1.0 + xr)));
    finalize(b, side);
    return b;
}

TailBound subgaussian_bound(const DominatingSpec& spec, const LipschitzTable& table, double x, Side side) {
    const std::size_t n = table.horizon();
    spec.validate(n);
    const double vn2 = aggregate_v(table, broadcast(spec.V, n, "V"));
    const double vn = std::sqrt(vn2);
    const double sigma = vn / std::sqrt(static_cast<double>(n));
    if (!(sigma > 0.0)) throw DomainError("subgaussian: sigma_n = 0");
    const double a = lead_weight(table);
    auto b = subgaussian_bound(x, spec.epsilon * a / sigma, side);
    b.aggregates["V_n"] = vn;
    b.aggregates["sigma_n"] = sigma;
    b.aggregates["epsilon"] = spec.epsilon;
    b.aggregates["a_lead"] = a;
    return b;
}

// ------------------------------------------------------------------ Cramer

double cramer_exponent(double t, double x, double k, double delta) {
    if (t >= delta) return kInf;
    return -t * x + t * t * k / (delta * delta) / (1.0 - t / delta);
}

double cramer_optimal_t(double x, double k, double delta) {
    require_positive_finite(x, "cramer_optimal_t: x");
    require_positive_finite(k, "cramer_optimal_t: K");
    require_positive_finite(delta, "cramer_optimal_t: delta");
    const double u = x * delta / k;
    return (x * delta * delta / k) / (u + 1.0 + std::sqrt(1.0 + u));
}

TailBound cramer_bound(double x, double k, double delta, Side side) {
    require_positive_finite(k, "cramer: K");
    require_positive_finite(delta, "cramer: delta");
    if (!(x > 0.0)) return trivial("cramer", x, side);
    TailBound b;
    b.kind = "cramer";
    b.x = x;
    const double xd = x * delta;
    b.raw = std::exp(-xd * xd / (2.0 * k * (1.0 + std::sqrt(1.0 + xd / k)) + xd));
    b.looser = std::exp(-xd * xd / (4.0 * k + 2.0 * xd));
    b.aggregates["K"] = k;
    b.aggregates["delta"] = delta;
    b.aggregates["t_opt"] = cramer_optimal_t(x, k, delta);
    finalize(b, side);
    return b;
}

TailBound cramer_bound(const DominatingSpec& spec, const LipschitzTable& table, double x, Side side) {
    const std::size_t n = table.horizon();
    spec.validate(n);
    const double a = lead_weight(table);
    const double k = 2.0 / (std::numbers::e * std::numbers::e) *
                     aggregate_v(table, broadcast(spec.K, n, "K")) / (a * a);
    auto b = cramer_bound(x, k, spec.t0 / a, side);
    b.aggregates["t0"] = spec.t0;
    b.aggregates["a_lead"] = a;
    return b;
}

// ------------------------------------------------------- semi-exponential

TailBound semiexp_g_bound(double x, double k, double a, double p, Side side) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("semiexp_g: p must lie in (0, 1)");
    require_positive_finite(a, "semiexp_g: a");
    require_nonneg(k, "semiexp_g: K");
    if (k < 1.0) {
        auto b = out_of_domain("semiexp_g", x, side, "K < 1");
        b.aggregates["K"] = k;
        if (x > 0.0) b.aggregates["two_regime"] = semiexp_g_two_regime(x, k, a, p);
        return b;
    }
    TailBound b;
    b.kind = "semiexp_g";
    b.x = x;
    b.aggregates["K"] = k;
    b.aggregates["a_lead"] = a;
    b.aggregates["p"] = p;
    const double xx = std::max(x, 0.0);
    b.raw = 2.0 * std::exp(-xx * xx / (2.0 * (k * a * a + std::pow(xx, 2.0 - p) * std::pow(a, p))));
    if (x > 0.0) b.aggregates["two_regime"] = semiexp_g_two_regime(x, k, a, p);
    finalize(b, side);
    return b;
}

TailBound semiexp_g_bound(const DominatingSpec& spec, const LipschitzTable& table, double x, Side side) {
    const std::size_t n = table.horizon();
    spec.validate(n);
    const double a = lead_weight(table);
    const double k = aggregate_v(table, broadcast(spec.K, n, "K")) / (a * a);
    return semiexp_g_bound(x, k, a, spec.p, side);
}

double semiexp_g_two_regime(double x, double k, double a, double p) {
    require_positive_finite(k, "semiexp_g_two_regime: K");
    require_positive_finite(a, "semiexp_g_two_regime: a");
    const double y = x / a;
    if (!(y > 0.0)) return 1.0;
    const double split = std::pow(k, 1.0 / (2.0 - p));
    if (y < split) {
        const double r = y / k;
        return std::exp(-y * y / (2.0 * k)) +
               k * std::pow(r, 2.0 / (1.0 - p)) * std::exp(-std::pow(k / y, p / (1.0 - p)));
    }
    const double yp = std::pow(y, p);
    return std::exp(-yp * (1.0 - k / (2.0 * std::pow(y, 2.0 - p)))) + k / (y * y) * std::exp(-yp);
}

double semiexp_h_constant(double alpha, double x, double a, double c1) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("semiexp_h: alpha must lie in (0, 1)");
    require_positive_finite(x, "semiexp_h: x");
    require_positive_finite(a, "semiexp_h: a");
    const double first = std::pow(a, 2.0 * alpha) / (std::pow(x, 2.0 * alpha) * std::pow(4.0, 2.0 - 3.0 * alpha));
    const double second =
        4.0 * a * a / (x * x) * std::pow(3.0 * (1.0 - alpha) / (2.0 * alpha), (1.0 - alpha) / alpha);
    return 2.0 + 35.0 * c1 * (first + second);
}

TailBound semiexp_h_bound(double x_per_step, std::size_t n, double a, double alpha, double c1, Side side) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("semiexp_h: alpha must lie in (0, 1)");
    require_nonneg(c1, "semiexp_h: C1");
    if (!(x_per_step > 0.0)) return trivial("semiexp_h", x_per_step, side);
    TailBound b;
    b.kind = "semiexp_h";
    b.x = x_per_step;
    const double c = semiexp_h_constant(alpha, x_per_step, a, c1);
    const double rate = std::pow(x_per_step / (8.0 * a), 2.0 * alpha) * std::pow(static_cast<double>(n), alpha);
    b.raw = c * std::exp(-rate);
    b.aggregates["C"] = c;
    b.aggregates["C1"] = c1;
    b.aggregates["alpha"] = alpha;
    b.aggregates["a_lead"] = a;
    b.aggregates["rate"] = rate;
    finalize(b, side);
    return b;
}

TailBound semiexp_h_bound(const DominatingSpec& spec, const LipschitzTable& table, double x_per_step,
                          Side side) {
    spec.validate(table.horizon());
    auto b = semiexp_h_bound(x_per_step, table.horizon(), lead_weight(table), spec.alpha, spec.C1, side);
    for (const auto& f : spec.flags) b.notes.push_back(f);
    return b;
}

// ----------------------------------------------------- Hoeffding family

TailBound fuk_nagaev_truncated(double x, double y, double v, double a, std::size_t n, double tail_of_max,
                               Side side) {
    require_positive_finite(y, "fuk_nagaev_truncated: y");
    require_positive_finite(a, "fuk_nagaev_truncated: a");
    require_nonneg(v, "fuk_nagaev_truncated: V");
    if (!(tail_of_max >= 0.0 && tail_of_max <= 1.0))
        throw DomainError("fuk_nagaev_truncated: tail_of_max must be a probability");
    if (!(x > 0.0)) return trivial("fuk_nagaev_truncated", x, side);
    TailBound b;
    b.kind = "fuk_nagaev_truncated";
    b.x = x;
    const double scale = y * a;
    const double xs = x / scale;
    const double vs = std::sqrt(v) / scale;
    const double nn = static_cast<double>(n);
    double h;
    if (vs > 0.0) {
        h = hn_function(xs, vs, nn);
        b.aggregates["bennett"] = bennett_b(xs, vs);
        b.aggregates["bernstein_b1"] = bernstein_b1(xs, vs);
    } else {
        h = 0.0;
        b.notes.push_back("degenerate variance");
    }
    b.raw = h + tail_of_max;
    b.aggregates["V"] = v;
    b.aggregates["a_lead"] = a;
    b.aggregates["y"] = y;
    b.aggregates["scaled_x"] = xs;
    b.aggregates["scaled_v"] = vs;
    b.aggregates["tail_of_max"] = tail_of_max;
    finalize(b, side);
    return b;
}

TailBound fuk_nagaev_truncated(const DominatingSpec& spec, const LipschitzTable& table, double x, double y,
                               double tail_of_max, Side side) {
    const std::size_t n = table.horizon();
    spec.validate(n);
    return fuk_nagaev_truncated(x, y, aggregate_v(table, broadcast(spec.V, n, "V")), lead_weight(table), n,
                                tail_of_max, side);
}

TailBound hoeffding_bound(double x, double m, double v, double a, std::size_t n, Side side) {
    if (!(m > 0.0)) throw DomainError("hoeffding: M must be positive");
    if (!(x > 0.0)) return trivial("hoeffding", x, side);
    auto b = fuk_nagaev_truncated(x, m, v, a, n, 0.0, side);
    b.kind = "hoeffding";
    b.aggregates["M"] = m;
    b.aggregates.erase("y");
    b.aggregates.erase("tail_of_max");
    return b;
}

TailBound hoeffding_bound(const DominatingSpec& spec, const LipschitzTable& table, double x, Side side) {
    const std::size_t n = table.horizon();
    spec.validate(n);
    return hoeffding_bound(x, spec.M, aggregate_v(table, broadcast(spec.V, n, "V")), lead_weight(table), n,
                           side);
}

TailBound fuk_nagaev_pth(double x, double p, double a_p, double v) {
    if (!(p >= 2.0) || !std::isfinite(p)) throw DomainError("fuk_nagaev_pth: p must be >= 2");
    require_nonneg(a_p, "fuk_nagaev_pth: A(p)");
    require_nonneg(v, "fuk_nagaev_pth: V");
    if (!(x > 0.0)) return trivial("fuk_nagaev_pth", x, Side::two_sided, true);
    TailBound b;
    b.kind = "fuk_nagaev_pth";
    b.x = x;
    b.native_two_sided = true;
    const double poly = 2.0 * std::pow(1.0 + 2.0 / p, p) * a_p / std::pow(x, p);
    const double rate = 2.0 / ((p + 2.0) * (p + 2.0) * std::exp(p));
    const double expo = v > 0.0 ? 2.0 * std::exp(-rate * x * x / v) : 0.0;
    b.raw = poly + expo;
    b.aggregates["A_p"] = a_p;
    b.aggregates["V"] = v;
    b.aggregates["p"] = p;
    b.aggregates["polynomial_term"] = poly;
    b.aggregates["exponential_term"] = expo;
    finalize(b, Side::two_sided);
    return b;
}

TailBound fuk_nagaev_pth(const DominatingSpec& spec, const LipschitzTable& table, double x) {
    const std::size_t n = table.horizon();
    spec.validate(n);
    if (spec.V.empty()) throw DomainError("fuk_nagaev_pth: variances V_k are required");
    return fuk_nagaev_pth(x, spec.p, weighted_power_sum(table, broadcast(spec.A, n, "A"), spec.p),
                          aggregate_v(table, broadcast(spec.V, n, "V")));
}

// -------------------------------------------------------------- McDiarmid

McDiarmidForms mcdiarmid_forms(double x, double d, double m2) {
    require_positive_finite(d, "mcdiarmid: D");
    require_positive_finite(m2, "mcdiarmid: M^2");
    if (!(x >= 0.0) || x > d) throw DomainError("mcdiarmid: x must lie in [0, D]");
    McDiarmidForms f;
    if (x == 0.0) return f;
    f.classical_form = std::exp(-2.0 * x * x / m2);
    if (x == d) {
        f.product_form = 0.0;
        f.ell_star_form = 0.0;
        return f;
    }
    const double r = x / d;
    f.product_form = std::exp((2.0 * d * x - x * x) / m2 * std::log1p(-r));
    f.ell_star_form = std::exp(-(d * d / m2) * rio_ell_star(r));
    return f;
}

TailBound mcdiarmid_bound(double x, double d, double m2, Side side) {
    if (!(x > 0.0)) return trivial("mcdiarmid", x, side);
    if (x > d) {
        auto b = out_of_domain("mcdiarmid", x, side, "x > D");
        b.aggregates["D"] = d;
        b.aggregates["M2"] = m2;
        return b;
    }
    const auto f = mcdiarmid_forms(x, d, m2);
    TailBound b;
    b.kind = "mcdiarmid";
    b.x = x;
    b.raw = f.ell_star_form;
    b.looser = f.product_form;
    b.aggregates["D"] = d;
    b.aggregates["M2"] = m2;
    b.aggregates["product_form"] = f.product_form;
    b.aggregates["classical_form"] = f.classical_form;
    finalize(b, side);
    return b;
}

TailBound mcdiarmid_bound(const DominatingSpec& spec, const LipschitzTable& table, double x, Side side) {
    const std::size_t n = table.horizon();
    spec.validate(n);
    if (spec.Mk.empty()) throw DomainError("mcdiarmid: increment ranges M_k are required");
    const auto mk = broadcast(spec.Mk, n, "Mk");
    double d = 0.0, m2 = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double t = table.increment_weight(k) * mk[k - 1];
        d += t;
        m2 += t * t;
    }
    return mcdiarmid_bound(x, d, m2, side);
}

// ------------------------------------------------------ polynomial tails

double vbe_aggregate(const LipschitzTable& table, const std::vector<double>& a, double p) {
    if (!(p >= 1.0 && p <= 2.0)) throw DomainError("von_bahr_esseen: p must lie in [1, 2]");
    check_length(table, a, "von_bahr_esseen");
    double s = a[0] * std::pow(table.increment_weight(1), p);
    const double c = std::pow(2.0, 2.0 - p);
    for (std::size_t k = 2; k <= a.size(); ++k) s += c * std::pow(table.increment_weight(k), p) * a[k - 1];
    return s;
}

double von_bahr_esseen(const LipschitzTable& table, const std::vector<double>& a, double p) {
    return std::pow(vbe_aggregate(table, a, p), 1.0 / p);
}

TailBound vbe_tail(double x, double a_np, double p) {
    if (!(p >= 1.0 && p <= 2.0)) throw DomainError("vbe_tail: p must lie in [1, 2]");
    require_nonneg(a_np, "vbe_tail: A(n, p)");
    if (!(x > 0.0)) return trivial("vbe", x, Side::two_sided, true);
    TailBound b;
    b.kind = "vbe";
    b.x = x;
    b.native_two_sided = true;
    b.raw = a_np / std::pow(x, p);
    b.aggregates["A_np"] = a_np;
    b.aggregates["p"] = p;
    finalize(b, Side::two_sided);
    return b;
}

TailBound vbe_tail(const DominatingSpec& spec, const LipschitzTable& table, double x) {
    const std::size_t n = table.horizon();
    spec.validate(n);
    return vbe_tail(x, vbe_aggregate(table, broadcast(spec.A, n, "A"), spec.p), spec.p);
}

double weak_vbe_constant(double p) {
    if (!(p > 1.0 && p < 2.0)) throw DomainError("weak_vbe: p must lie strictly inside (1, 2)");
    return 4.0 * p / (p - 1.0) + 8.0 / (2.0 - p);
}

TailBound weak_vbe_tail(double x, double b_np, double p) {
    if (!(p > 1.0 && p < 2.0)) {
        auto b = out_of_domain("weak_vbe", x, Side::two_sided, "p outside (1, 2)");
        b.native_two_sided = true;
        return b;
    }
    require_nonneg(b_np, "weak_vbe: B(n, p)");
    if (!(x > 0.0)) return trivial("weak_vbe", x, Side::two_sided, true);
    TailBound b;
    b.kind = "weak_vbe";
    b.x = x;
    b.native_two_sided = true;
    const double c = weak_vbe_constant(p);
    b.raw = c * b_np / std::pow(x, p);
    b.aggregates["C_p"] = c;
    b.aggregates["B_np"] = b_np;
    b.aggregates["p"] = p;
    finalize(b, Side::two_sided);
    return b;
}

TailBound weak_vbe_tail(const DominatingSpec& spec, const LipschitzTable& table, double x) {
    const std::size_t n = table.horizon();
    spec.validate(n);
    if (!(spec.p > 1.0 && spec.p < 2.0)) return weak_vbe_tail(x, 0.0, spec.p);
    return weak_vbe_tail(x, weighted_power_sum(table, broadcast(spec.A, n, "A"), spec.p), spec.p);
}

double mz_aggregate(const LipschitzTable& table, const std::vector<double>& a, double p) {
    if (!(p >= 2.0) || !std::isfinite(p)) throw DomainError("mz_norm_bound: p must be >= 2");
    check_length(table, a, "mz_norm_bound");
    const double w1 = table.increment_weight(1);
    double s = w1 * w1 * std::pow(a[0], 2.0 / p);
    for (std::size_t k = 2; k <= a.size(); ++k) {
        const double w = table.increment_weight(k);
        s += (p - 1.0) * w * w * std::pow(a[k - 1], 2.0 / p);
    }
    return s;
}

double mz_norm_bound(const LipschitzTable& table, const std::vector<double>& a, double p) {
    return std::sqrt(mz_aggregate(table, a, p));
}

double rosenthal_c1(double c) { return 60.0 * c; }
double rosenthal_c2(double c, double p) { return 120.0 * std::sqrt(c) * std::exp(p / c); }

namespace {

constexpr int kRosenthalGrid = 64;

template <class Total>
RosenthalResult minimize_over_c(double p, Total total) {
    RosenthalResult best;
    best.value = kInf;
    for (int j = 0; j < kRosenthalGrid; ++j) {
        const double c = std::pow(p, static_cast<double>(j) / (kRosenthalGrid - 1));
        const double v = total(rosenthal_c1(c), rosenthal_c2(c, p));
        if (v < best.value) {
            best.value = v;
            best.c = c;
            best.c1 = rosenthal_c1(c);
            best.c2 = rosenthal_c2(c, p);
        }
    }
    return best;
}

}  // namespace

RosenthalResult rosenthal_bound(double v, double max_norm, double p) {
    if (!(p >= 2.0) || !std::isfinite(p)) throw DomainError("rosenthal: p must be >= 2");
    require_nonneg(v, "rosenthal: V");
    require_nonneg(max_norm, "rosenthal: max norm");
    const double sv = std::sqrt(v);
    return minimize_over_c(p, [&](double c1, double c2) { return c1 * sv + c2 * max_norm; });
}

RosenthalResult weak_rosenthal_tail(double x, double v, double weak_max_p, double p) {
    if (!(p >= 2.0) || !std::isfinite(p)) throw DomainError("weak rosenthal: p must be >= 2");
    require_positive_finite(x, "weak rosenthal: x");
    require_nonneg(v, "weak rosenthal: V");
    require_nonneg(weak_max_p, "weak rosenthal: weak max norm");
    const double vp = std::pow(v, p / 2.0);
    const double xp = std::pow(x, p);
    auto r = minimize_over_c(p, [&](double c1, double c2) { return (c1 * vp + c2 * weak_max_p) / xp; });
    r.constant_uncertain = true;
    return r;
}

TailBound weak_rosenthal_bound(const DominatingSpec& spec, const LipschitzTable& table, double x) {
    const std::size_t n = table.horizon();
    spec.validate(n);
    if (spec.V.empty()) throw DomainError("weak rosenthal: variances V_k are required");
    if (!(x > 0.0)) return trivial("weak_rosenthal", x, Side::two_sided, true);
    const double v = aggregate_v(table, broadcast(spec.V, n, "V"));
    const auto r = weak_rosenthal_tail(x, v, spec.max_norm, spec.p);
    TailBound b;
    b.kind = "weak_rosenthal";
    b.x = x;
    b.native_two_sided = true;
    b.raw = r.value;
    b.aggregates["V"] = v;
    b.aggregates["c"] = r.c;
    b.aggregates["C1"] = r.c1;
    b.aggregates["C2"] = r.c2;
    b.notes.push_back("constant_uncertain");
    finalize(b, Side::two_sided);
    return b;
}

// ---------------------------------------------------------------- dispatch

std::string to_string(BoundKind k) {
    switch (k) {
        case BoundKind::bernstein: return "bernstein";
        case BoundKind::subgaussian: return "subgaussian";
        case BoundKind::cramer: return "cramer";
        case BoundKind::semiexp_g: return "semiexp_g";
        case BoundKind::semiexp_h: return "semiexp_h";
        case BoundKind::fuk_nagaev_truncated: return "fuk_nagaev_truncated";
        case BoundKind::hoeffding: return "hoeffding";
        case BoundKind::fuk_nagaev_pth: return "fuk_nagaev_pth";
        case BoundKind::mcdiarmid: return "mcdiarmid";
        case BoundKind::vbe: return "vbe";
        case BoundKind::weak_vbe: return "weak_vbe";
        case BoundKind::weak_rosenthal: return "weak_rosenthal";
    }
    return "?";
}

BoundKind bound_kind_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(BoundKind::weak_rosenthal); ++i) {
        const auto k = static_cast<BoundKind>(i);
        if (to_string(k) == s) return k;
    }
    throw ConfigError("unknown bound kind '" + s + "'");
}

DominatingKind required_dominating_kind(BoundKind k) {
    switch (k) {
        case BoundKind::bernstein: return DominatingKind::bernstein;
        case BoundKind::subgaussian: return DominatingKind::subgaussian;
        case BoundKind::cramer: return DominatingKind::cramer;
        case BoundKind::semiexp_g: return DominatingKind::semiexp_g;
        case BoundKind::semiexp_h: return DominatingKind::semiexp_h;
        case BoundKind::fuk_nagaev_truncated:
        case BoundKind::hoeffding:
        case BoundKind::mcdiarmid: return DominatingKind::bounded;
        case BoundKind::fuk_nagaev_pth:
        case BoundKind::vbe: return DominatingKind::pth_moment;
        case BoundKind::weak_vbe:
        case BoundKind::weak_rosenthal: return DominatingKind::weak_pth;
    }
    return DominatingKind::bounded;
}

bool bound_needs_c2(BoundKind k) {
    switch (k) {
        case BoundKind::subgaussian:
        case BoundKind::semiexp_h:
        case BoundKind::mcdiarmid:
        case BoundKind::vbe:
        case BoundKind::weak_vbe: return false;
        default: return true;
    }
}

TailBound evaluate_bound(BoundKind kind, const DominatingSpec& spec, const LipschitzTable& table, double s,
                         Side side) {
    if (spec.kind != required_dominating_kind(kind))
        throw DomainError("bound " + to_string(kind) + " needs " + to_string(required_dominating_kind(kind)) +
                          " constants, got " + to_string(spec.kind));
    TailBound b;
    switch (kind) {
        case BoundKind::bernstein: b = bernstein_bound(spec, table, s, side); break;
        case BoundKind::subgaussian: {
            const std::size_t n = table.horizon();
            const double vn = std::sqrt(aggregate_v(table, broadcast(spec.V, n, "V")));
            if (!(vn > 0.0)) throw DomainError("subgaussian: V_n = 0");
            b = subgaussian_bound(spec, table, s / vn, side);
            break;
        }
        case BoundKind::cramer: b = cramer_bound(spec, table, s, side); break;
        case BoundKind::semiexp_g: b = semiexp_g_bound(spec, table, s, side); break;
        case BoundKind::semiexp_h:
            b = semiexp_h_bound(spec, table, s / static_cast<double>(table.horizon()), side);
            break;
        case BoundKind::fuk_nagaev_truncated: b = fuk_nagaev_truncated(spec, table, s, spec.M, 0.0, side); break;
        case BoundKind::hoeffding: b = hoeffding_bound(spec, table, s, side); break;
        case BoundKind::fuk_nagaev_pth: b = fuk_nagaev_pth(spec, table, s); break;
        case BoundKind::mcdiarmid: b = mcdiarmid_bound(spec, table, s, side); break;
        case BoundKind::vbe: b = vbe_tail(spec, table, s); break;
        case BoundKind::weak_vbe: b = weak_vbe_tail(spec, table, s); break;
        case BoundKind::weak_rosenthal: b = weak_rosenthal_bound(spec, table, s); break;
    }
    b.aggregates["native_x"] = b.x;
    b.x = s;
    for (const auto& f : spec.flags)
        if (std::find(b.notes.begin(), b.notes.end(), f) == b.notes.end()) b.notes.push_back(f);
    return b;
}

}  // namespace imdev

#include "imdev/process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "imdev/errors.hpp"
#include "imdev/serialize.hpp"

namespace imdev {

std::string to_string(Family f) {
    switch (f) {
        case Family::random_memory_ar: return "random_memory_ar";
        case Family::step_reinforced_erw: return "step_reinforced_erw";
        case Family::mean_field_memory: return "mean_field_memory";
        case Family::memory_one_infinite: return "memory_one_infinite";
        case Family::arch_type: return "arch_type";
    }
    return "unknown";
}

Family family_from_string(const std::string& s) {
    for (Family f : {Family::random_memory_ar, Family::step_reinforced_erw, Family::mean_field_memory,
                     Family::memory_one_infinite, Family::arch_type})
        if (to_string(f) == s) return f;
    throw ConfigError("unknown process family '" + s + "'");
}

std::string to_string(Response::Kind k) {
    switch (k) {
        case Response::Kind::identity: return "identity";
        case Response::Kind::tanh_scaled: return "tanh_scaled";
        case Response::Kind::clipped_linear: return "clipped_linear";
    }
    return "unknown";
}

Response::Kind response_from_string(const std::string& s) {
    for (auto k : {Response::Kind::identity, Response::Kind::tanh_scaled,
                   Response::Kind::clipped_linear})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown response '" + s + "'");
}

double Response::operator()(double u) const {
    switch (kind) {
        case Kind::identity: return u;
        case Kind::tanh_scaled: return scale * std::tanh(u / scale);
        case Kind::clipped_linear: return std::clamp(u, -scale, scale);
    }
    return u;
}

double CoefficientSequence::at(std::size_t i) const {
    if (i == 0) return 0.0;
    if (i <= values.size()) return values[i - 1];
    if (!tail) return 0.0;
    return tail->first * std::pow(tail->ratio, static_cast<double>(i - values.size() - 1));
}

std::size_t CoefficientSequence::effective_length() const {
    if (!tail || tail->first == 0.0) {
        std::size_t L = values.size();
        while (L > 0 && values[L - 1] == 0.0) --L;
        return std::max<std::size_t>(L, 1);
    }
    const double r = std::abs(tail->ratio);
    double remaining = std::abs(tail->first) / (1.0 - r);
    std::size_t j = 0;
    while (remaining >= 1e-12 && j < 1'000'000) {
        remaining *= r;
        ++j;
    }
    return values.size() + j;
}

ContractionProfile CoefficientSequence::scaled_abs_profile(double scale) const {
    std::vector<double> v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) v[i] = scale * std::abs(values[i]);
    if (tail) return ContractionProfile(v, GeometricTail{scale * std::abs(tail->first), std::abs(tail->ratio)});
    return ContractionProfile(v);
}

namespace {

bool lag_family(Family f) {
    return f == Family::random_memory_ar || f == Family::memory_one_infinite;
}

ContractionProfile checked_profile(const ProcessSpec& spec, std::vector<double> v,
                                   const std::string& condition) {
    try {
        return ContractionProfile(std::move(v));
    } catch (const CertificateViolation& e) {
        throw CertificateViolation(to_string(spec.family) + ": contraction condition " + condition +
                                       " fails (sum = " + std::to_string(e.computed_sum()) + ")",
                                   e.computed_sum());
    }
}

ContractionProfile checked_profile(const ProcessSpec& spec, const CoefficientSequence& c,
                                   double scale, const std::string& condition) {
    try {
        return c.scaled_abs_profile(scale);
    } catch (const CertificateViolation& e) {
        throw CertificateViolation(to_string(spec.family) + ": contraction condition " + condition +
                                       " fails (sum = " + std::to_string(e.computed_sum()) + ")",
                                   e.computed_sum());
    }
}

Certificate make_certificate(const ProcessSpec& spec) {
    Certificate c;
    switch (spec.family) {
        case Family::random_memory_ar: {
            const std::size_t K = spec.lag_law.max_lag();
            std::vector<double> v(K);
            for (std::size_t i = 1; i <= K; ++i)
                v[i - 1] = std::abs(spec.coefficients.at(i)) * spec.lag_law.prob_at_least(i);
            c.profile = checked_profile(spec, std::move(v), "sum |a_i| P(J >= i) < 1");
            break;
        }
        case Family::memory_one_infinite: {
            const std::size_t K = spec.lag_law.max_lag();
            std::vector<double> v(K);
            for (std::size_t i = 1; i <= K; ++i)
                v[i - 1] = std::abs(spec.coefficients.at(i)) * spec.lag_law.prob(i);
            c.profile = checked_profile(spec, std::move(v), "sum |a_i| P(J = i) < 1");
            break;
        }
        case Family::mean_field_memory:
            c.profile = checked_profile(spec, spec.coefficients, spec.response.lipschitz(),
                                        "Lip(r) sum |a_i| < 1");
            break;
        case Family::arch_type:
            if (!(spec.arch_floor > 0.0)) throw DomainError("arch_type: floor b must be > 0");
            c.profile = checked_profile(spec, spec.coefficients, spec.innovation.mean_abs(),
                                        "sum |a_j| E|eps| < 1");
            break;
        case Family::step_reinforced_erw: {
            const auto& e = spec.erw;
            if (!(e.t > 0.0 && e.t <= 1.0)) throw DomainError("step_reinforced_erw: t must be in (0,1]");
            if (!(e.p >= 0.0 && e.p <= 1.0)) throw DomainError("step_reinforced_erw: p must be in [0,1]");
            c.profile = checked_profile(spec, std::vector<double>{1.0 - e.t}, "1 - t < 1");
            c.experimental = true;
            c.note = "row coefficients (1-t)/(n-1) depend on n; per-row sum 1-t used in place of "
                     "sum a_i";
            break;
        }
    }
    return c;
}

}  // namespace

ProcessModel::ProcessModel(ProcessSpec spec) : ProcessModel(std::move(spec), true) {}

ProcessModel ProcessModel::unchecked(ProcessSpec spec) { return ProcessModel(std::move(spec), false); }

ProcessModel::ProcessModel(ProcessSpec spec, bool check) : spec_(std::move(spec)) {
    if (check) certificate_ = make_certificate(spec_);
    if (!std::isfinite(spec_.initial_past.value)) throw DomainError("initial past: value must be finite");
    std::size_t needed = 0;
    switch (spec_.family) {
        case Family::random_memory_ar:
        case Family::memory_one_infinite: needed = spec_.lag_law.max_lag(); break;
        case Family::mean_field_memory:
        case Family::arch_type: needed = spec_.coefficients.effective_length(); break;
        case Family::step_reinforced_erw: needed = 0; break;
    }
    window_ = spec_.memory_truncation > 0 && spec_.family != Family::step_reinforced_erw
                  ? spec_.memory_truncation
                  : needed;
    const std::size_t ncoef = std::max(window_, lag_family(spec_.family) ? spec_.lag_law.max_lag() : 0);
    coeffs_.resize(ncoef);
    for (std::size_t i = 0; i < ncoef; ++i) coeffs_[i] = spec_.coefficients.at(i + 1);
    if (spec_.family == Family::mean_field_memory && !(spec_.response.scale > 0.0))
        throw DomainError("mean_field_memory: response scale must be > 0");
    digest_ = spec_digest(spec_);
}

InnovationDraw ProcessModel::draw(std::size_t t, CounterStream& rng) const {
    InnovationDraw d;
    switch (spec_.family) {
        case Family::random_memory_ar:
        case Family::memory_one_infinite: d.lag = spec_.lag_law.sample(rng); break;
        case Family::step_reinforced_erw: {
            const double u = rng.uniform();
            if (t <= 1) {
                d.gamma = 0;
                d.lag = 0;
            } else {
                const double t0 = spec_.erw.t;
                d.gamma = u < t0 ? 0 : (u < t0 + (1.0 - t0) * spec_.erw.p ? 1 : -1);
                d.lag = 1 + static_cast<std::size_t>(rng.below(t - 1));
            }
            break;
        }
        default: break;
    }
    d.value = spec_.innovation.sample(rng);
    return d;
}

double ProcessModel::step(std::span<const double> past, const InnovationDraw& d,
                          std::size_t* truncations) const {
    auto clamp_lag = [&](std::size_t lag) {
        if (lag > past.size()) {
            if (truncations) ++*truncations;
            return past.size();
        }
        return lag;
    };
    switch (spec_.family) {
        case Family::random_memory_ar: {
            const std::size_t J = clamp_lag(d.lag);
            double s = d.value;
            for (std::size_t i = 0; i < J; ++i) s += coeffs_[i] * past[i];
            return s;
        }
        case Family::memory_one_infinite: {
            const std::size_t j = clamp_lag(d.lag);
            return j == 0 ? d.value : coeffs_[d.lag - 1] * past[j - 1] + d.value;
        }
        case Family::mean_field_memory: {
            const std::size_t L = std::min(window_, past.size());
            double y = 0.0;
            for (std::size_t i = 0; i < L; ++i) y += coeffs_[i] * past[i];
            return spec_.response(y) + d.value;
        }
        case Family::arch_type: {
            const std::size_t L = std::min(window_, past.size());
            double q = spec_.arch_floor * spec_.arch_floor;
            for (std::size_t i = 0; i < L; ++i) q += coeffs_[i] * coeffs_[i] * past[i] * past[i];
            return std::sqrt(q) * d.value;
        }
        case Family::step_reinforced_erw: {
            if (d.gamma == 0 || past.empty()) return d.value;
            const std::size_t lag = clamp_lag(d.lag);
            return d.gamma * past[lag - 1];
        }
    }
    return 0.0;
}

double ProcessModel::h_value(std::span<const double> past, const InnovationDraw& d) const {
    const auto& law = spec_.innovation;
    const double v = step(past, d);
    switch (spec_.family) {
        case Family::mean_field_memory: return law.dominating_g(d.value);
        case Family::arch_type: {
            const std::size_t L = std::min(window_, past.size());
            double q = spec_.arch_floor * spec_.arch_floor;
            for (std::size_t i = 0; i < L; ++i) q += coeffs_[i] * coeffs_[i] * past[i] * past[i];
            return std::sqrt(q) * law.dominating_g(d.value);
        }
        case Family::memory_one_infinite: {
            double h = 0.0;
            for (std::size_t j = 1; j <= spec_.lag_law.max_lag(); ++j) {
                const double pj = spec_.lag_law.prob(j);
                if (pj == 0.0) continue;
                const std::size_t pos = std::min(j, past.size());
                const double drift = pos == 0 ? 0.0 : coeffs_[j - 1] * past[pos - 1];
                h += pj * law.dominating_g(v - drift);
            }
            return h;
        }
        case Family::random_memory_ar: {
            double h = 0.0;
            double drift = 0.0;
            for (std::size_t j = 1; j <= spec_.lag_law.max_lag(); ++j) {
                if (j <= past.size()) drift += coeffs_[j - 1] * past[j - 1];
                const double pj = spec_.lag_law.prob(j);
                if (pj > 0.0) h += pj * law.dominating_g(v - drift);
            }
            return h;
        }
        case Family::step_reinforced_erw: {
            if (past.empty()) return law.dominating_g(v);
            double plus = 0.0, minus = 0.0;
            for (double x : past) {
                plus += std::abs(v - x);
                minus += std::abs(v + x);
            }
            const double m = static_cast<double>(past.size());
            const auto& e = spec_.erw;
            return e.t * law.dominating_g(v) + (1.0 - e.t) * e.p * plus / m +
                   (1.0 - e.t) * (1.0 - e.p) * minus / m;
        }
    }
    return 0.0;
}

template <class OnStep>
std::size_t ProcessModel::run(std::uint64_t seed, std::uint64_t replicate, std::size_t n,
                              std::vector<double>& scratch, OnStep&& on_step) const {
    const auto& ip = spec_.initial_past;
    const bool erw = spec_.family == Family::step_reinforced_erw;
    const std::size_t burn = ip.kind == InitialPast::Kind::burn_in ? ip.steps : 0;
    const std::size_t T = burn + n;
    const std::size_t L = erw ? 0 : window_;
    const double fill = ip.kind == InitialPast::Kind::constant ? ip.value : 0.0;
    scratch.assign(T + L, fill);
    std::size_t truncations = 0;
    for (std::size_t t = 1; t <= T; ++t) {
        CounterStream rng(seed, StreamPurpose::simulation, replicate, t);
        const InnovationDraw d = draw(t, rng);
        const std::span<const double> past(scratch.data() + (T - t + 1), erw ? t - 1 : L);
        const double x = step(past, d, &truncations);
        scratch[T - t] = x;
        if (t > burn) on_step(t - burn, x, past, d);
    }
    return truncations;
}

std::size_t ProcessModel::simulate_into(std::uint64_t seed, std::uint64_t replicate,
                                        std::span<double> out, std::vector<double>& scratch) const {
    return run(seed, replicate, out.size(), scratch,
               [&](std::size_t k, double x, std::span<const double>, const InnovationDraw&) {
                   out[k - 1] = x;
               });
}

std::size_t ProcessModel::simulate_with_h(std::uint64_t seed, std::uint64_t replicate,
                                          std::span<double> out, std::span<double> h_out,
                                          std::vector<double>& scratch) const {
    if (h_out.size() != out.size()) throw DomainError("simulate_with_h: size mismatch");
    return run(seed, replicate, out.size(), scratch,
               [&](std::size_t k, double x, std::span<const double> past, const InnovationDraw& d) {
                   out[k - 1] = x;
                   h_out[k - 1] = h_value(past, d);
               });
}

double step(const ProcessSpec& spec, std::span<const double> past, const InnovationDraw& draw) {
    return ProcessModel(spec).step(past, draw);
}

Trajectory simulate(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw DomainError("simulate: n must be >= 1");
    const ProcessModel model(spec);
    Trajectory tr;
    tr.values.resize(n);
    tr.seed = seed;
    tr.spec_digest = model.digest();
    std::vector<double> scratch;
    tr.truncation_events = model.simulate_into(seed, 0, tr.values, scratch);
    return tr;
}

Certificate contraction_certificate(const ProcessSpec& spec) { return make_certificate(spec); }

bool supports_c2(const ProcessSpec& spec) {
    switch (spec.family) {
        case Family::mean_field_memory: return true;
        case Family::memory_one_infinite:
        case Family::random_memory_ar: {
            if (spec.lag_law.is_degenerate()) return true;
            double s = 0.0;
            for (std::size_t i = 1; i <= spec.lag_law.max_lag(); ++i)
                if (spec.lag_law.prob_at_least(i) > 0.0) s += std::abs(spec.coefficients.at(i));
            return s < 1.0 - ContractionProfile::kContractionMargin;
        }
        default: return false;
    }
}

DominationProfile domination_profile(const ProcessSpec& spec) {
    const Certificate cert = make_certificate(spec);
    switch (spec.family) {
        case Family::mean_field_memory: return {cert.profile, false};
        case Family::memory_one_infinite:
        case Family::random_memory_ar: {
            if (spec.lag_law.is_degenerate()) return {cert.profile, false};
            if (!supports_c2(spec))
                throw UnsupportedError(to_string(spec.family) +
                                       ": random lags with sum |a_i| >= 1 do not satisfy the innovation-Lipschitz condition");
            std::vector<double> v(spec.lag_law.max_lag());
            for (std::size_t i = 1; i <= v.size(); ++i)
                v[i - 1] = spec.lag_law.prob_at_least(i) > 0.0 ? std::abs(spec.coefficients.at(i)) : 0.0;
            return {ContractionProfile(std::move(v)), true};
        }
        default:
            throw UnsupportedError(to_string(spec.family) +
                                   ": the innovation-Lipschitz condition fails; only H-based bounds apply");
    }
}

double dominating_sample(const ProcessSpec& spec, std::uint64_t seed) {
    if (!supports_c2(spec))
        throw UnsupportedError(to_string(spec.family) + ": G is not defined without the innovation-Lipschitz condition");
    CounterStream rng(seed, StreamPurpose::dominating, 0, 0);
    return spec.innovation.dominating_g(spec.innovation.sample(rng));
}

MeanWithError coupled_discrepancy(const ProcessSpec& spec, std::span<const double> past_a,
                                  std::span<const double> past_b, std::size_t draws,
                                  std::uint64_t seed) {
    if (past_a.size() != past_b.size()) throw DomainError("coupled_discrepancy: window sizes differ");
    if (draws == 0) throw DomainError("coupled_discrepancy: draws must be >= 1");
    const ProcessModel model(spec);
    const std::size_t t = past_a.size() + 1;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        CounterStream rng(seed, StreamPurpose::coupling, i, t);
        const InnovationDraw d = model.draw(t, rng);
        const double diff = std::abs(model.step(past_a, d) - model.step(past_b, d));
        sum += diff;
        sumsq += diff * diff;
    }
    const double m = static_cast<double>(draws);
    const double mean = sum / m;
    const double var = draws > 1 ? std::max(0.0, (sumsq - m * mean * mean) / (m - 1.0)) : 0.0;
    return {mean, std::sqrt(var / m)};
}

std::vector<double> erw_row_coefficients(double t, std::size_t n) {
    if (n < 2) return {};
    return std::vector<double>(n - 1, (1.0 - t) / static_cast<double>(n - 1));
}

}  // namespace imdev

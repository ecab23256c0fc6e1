#include "imdev/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "imdev/errors.hpp"

namespace imdev {

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("IMDEV_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_blocks(std::size_t count, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t)>& body, std::size_t block_size) {
    if (count == 0) return;
    block_size = std::max<std::size_t>(block_size, 1);
    const std::size_t blocks = (count + block_size - 1) / block_size;
    const std::size_t workers = std::min(resolve_threads(threads), blocks);
    auto run_block = [&](std::size_t b) { body(b * block_size, std::min(count, (b + 1) * block_size)); };
    if (workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= blocks) return;
            try {
                run_block(b);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(blocks);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

namespace {

std::vector<double> sample_functional_counted(const ProcessModel& model, const FunctionalSpec& f, std::size_t n,
                                              std::uint64_t first, std::size_t count, std::uint64_t seed,
                                              std::size_t threads, std::size_t* truncations) {
    if (n == 0) throw DomainError("horizon n must be >= 1");
    std::vector<double> out(count);
    std::atomic<std::size_t> trunc{0};
    parallel_blocks(count, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> path(n), scratch;
        std::size_t local = 0;
        for (std::size_t i = begin; i < end; ++i) {
            local += model.simulate_into(seed, first + i, path, scratch);
            out[i] = f(path);
        }
        trunc.fetch_add(local);
    });
    if (truncations) *truncations = trunc.load();
    return out;
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
    MeanSd r;
    if (v.empty()) return r;
    double s = 0.0;
    for (double x : v) s += x;
    r.mean = s / static_cast<double>(v.size());
    double q = 0.0;
    for (double x : v) q += (x - r.mean) * (x - r.mean);
    r.sd = v.size() > 1 ? std::sqrt(q / static_cast<double>(v.size() - 1)) : 0.0;
    return r;
}

double two_sided_z(double level) { return normal_quantile(1.0 - (1.0 - level) / 2.0); }

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
}

struct CenteredSample {
    std::vector<double> main;  // f - center
    double center = 0.0;
    double center_se = 0.0;
    std::size_t pilot = 0;
    std::size_t truncations = 0;
    std::uint64_t digest = 0;
};

CenteredSample centered_sample(const ProcessSpec& spec, const FunctionalSpec& f, std::size_t n,
                               std::size_t replicates, std::uint64_t seed, std::size_t threads) {
    if (replicates < 1000) throw DomainError("empirical tails need at least 1000 replicates");
    const ProcessModel model(spec);
    std::size_t truncations = 0;
    auto values = sample_functional_counted(model, f, n, 0, replicates, seed, threads, &truncations);
    CenteredSample c;
    c.pilot = replicates / 2;
    const std::vector<double> pilot(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(c.pilot));
    const auto ms = mean_sd(pilot);
    c.center = ms.mean;
    c.center_se = ms.sd / std::sqrt(static_cast<double>(c.pilot));
    c.main.assign(values.begin() + static_cast<std::ptrdiff_t>(c.pilot), values.end());
    for (double& v : c.main) v -= c.center;
    c.truncations = truncations;
    c.digest = model.digest();
    return c;
}

EmpiricalEstimate finish_estimate(const CenteredSample& c, const std::vector<double>& x_grid, Side side,
                                  double level, std::uint64_t seed) {
    auto e = tail_from_samples(c.main, x_grid, side, level);
    e.pilot_replicates = c.pilot;
    e.center = c.center;
    e.center_se = c.center_se;
    e.seed = seed;
    e.spec_digest = c.digest;
    e.truncation_events = c.truncations;
    return e;
}

}  // namespace

std::vector<double> sample_functional(const ProcessModel& model, const FunctionalSpec& f, std::size_t n,
                                      std::uint64_t first, std::size_t count, std::uint64_t seed,
                                      std::size_t threads) {
    return sample_functional_counted(model, f, n, first, count, seed, threads, nullptr);
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double level) {
    check_level(level);
    if (trials == 0) throw DomainError("wilson_interval: no trials");
    if (successes > trials) throw DomainError("wilson_interval: successes exceed trials");
    const double z = two_sided_z(level);
    const double N = static_cast<double>(trials);
    const double ph = static_cast<double>(successes) / N;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / N;
    const double mid = (ph + z2 / (2.0 * N)) / denom;
    const double half = z / denom * std::sqrt(ph * (1.0 - ph) / N + z2 / (4.0 * N * N));
    WilsonInterval w;
    w.lower = successes == 0 ? 0.0 : std::max(0.0, mid - half);
    w.upper = successes == trials ? 1.0 : std::min(1.0, mid + half);
    return w;
}

EmpiricalEstimate tail_from_samples(const std::vector<double>& centered, const std::vector<double>& x_grid,
                                    Side side, double ci_level) {
    check_level(ci_level);
    if (centered.empty()) throw DomainError("tail_from_samples: empty sample");
    if (!std::is_sorted(x_grid.begin(), x_grid.end())) throw DomainError("x grid must be sorted ascending");
    std::vector<double> stat(centered.size());
    for (std::size_t i = 0; i < centered.size(); ++i) {
        const double s = centered[i];
        stat[i] = side == Side::upper ? s : (side == Side::lower ? -s : std::abs(s));
    }
    std::sort(stat.begin(), stat.end());
    EmpiricalEstimate e;
    e.x_grid = x_grid;
    e.side = side;
    e.ci_level = ci_level;
    e.replicates = centered.size();
    for (double x : x_grid) {
        const auto it = std::lower_bound(stat.begin(), stat.end(), x);
        const std::size_t count = static_cast<std::size_t>(stat.end() - it);
        const auto w = wilson_interval(count, stat.size(), ci_level);
        e.counts.push_back(count);
        e.tail_freq.push_back(static_cast<double>(count) / static_cast<double>(stat.size()));
        e.lower_ci.push_back(w.lower);
        e.upper_ci.push_back(w.upper);
    }
    return e;
}

EmpiricalEstimate empirical_tail(const ProcessSpec& spec, const FunctionalSpec& f, std::size_t n,
                                 const std::vector<double>& x_grid, std::size_t replicates, std::uint64_t seed,
                                 const TailOptions& options) {
    for (double x : x_grid)
        if (!(x > 0.0)) throw DomainError("empirical_tail: thresholds must be positive");
    const auto c = centered_sample(spec, f, n, replicates, seed, options.threads);
    return finish_estimate(c, x_grid, options.side, options.ci_level, seed);
}

TailPair empirical_tail_pair(const ProcessSpec& spec, const FunctionalSpec& f, std::size_t n,
                             const std::vector<double>& x_grid, std::size_t replicates, std::uint64_t seed,
                             double ci_level, std::size_t threads) {
    for (double x : x_grid)
        if (!(x > 0.0)) throw DomainError("empirical_tail: thresholds must be positive");
    const auto c = centered_sample(spec, f, n, replicates, seed, threads);
    return {finish_estimate(c, x_grid, Side::upper, ci_level, seed),
            finish_estimate(c, x_grid, Side::two_sided, ci_level, seed)};
}

MomentEstimate moment_from_samples(const std::vector<double>& values, double p, std::uint64_t seed, double level,
                                   std::size_t resamples) {
    if (!(p >= 1.0)) throw DomainError("empirical_moment: p must be >= 1");
    check_level(level);
    if (values.size() < 2) throw DomainError("empirical_moment: need at least two samples");
    auto plug_in = [p](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v) s += std::pow(std::abs(x - m), p);
        return std::pow(s / static_cast<double>(v.size()), 1.0 / p);
    };
    MomentEstimate r;
    r.p = p;
    r.level = level;
    r.replicates = values.size();
    r.resamples = resamples;
    r.estimate = plug_in(values);
    if (resamples == 0) {
        r.lower = r.upper = r.estimate;
        return r;
    }
    std::vector<double> boot(resamples), draw(values.size());
    for (std::size_t b = 0; b < resamples; ++b) {
        CounterStream rng(seed, StreamPurpose::bootstrap, b, 0);
        for (auto& d : draw) d = values[rng.below(values.size())];
        boot[b] = plug_in(draw);
    }
    std::sort(boot.begin(), boot.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(resamples - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, resamples - 1);
        return boot[lo] + (pos - static_cast<double>(lo)) * (boot[hi] - boot[lo]);
    };
    r.lower = quantile((1.0 - level) / 2.0);
    r.upper = quantile(1.0 - (1.0 - level) / 2.0);
    return r;
}

MomentEstimate empirical_moment(const ProcessSpec& spec, const FunctionalSpec& f, std::size_t n, double p,
                                std::size_t replicates, std::uint64_t seed, double level, std::size_t threads,
                                std::size_t resamples) {
    if (!(p >= 1.0)) throw DomainError("empirical_moment: p must be >= 1");
    const ProcessModel model(spec);
    const auto values = sample_functional(model, f, n, 0, replicates, seed, threads);
    return moment_from_samples(values, p, seed, level, resamples);
}

WeakNorm estimate_weak_norm(std::vector<double> samples, double p, double level) {
    if (samples.empty()) throw DomainError("estimate_weak_norm: empty sample");
    if (!(p > 0.0)) throw DomainError("estimate_weak_norm: p must be positive");
    for (double x : samples)
        if (!(x >= 0.0)) throw DomainError("estimate_weak_norm: samples must be nonnegative");
    std::sort(samples.begin(), samples.end(), std::greater<>());
    const std::size_t N = samples.size();
    WeakNorm w;
    for (std::size_t i = 0; i < N; ++i) {
        if (i + 1 < N && samples[i + 1] == samples[i]) continue;  // evaluate at the end of a tie run
        const double x = samples[i];
        if (x == 0.0) break;
        const std::size_t count = i + 1;
        const double xp = std::pow(x, p);
        w.estimate = std::max(w.estimate, xp * static_cast<double>(count) / static_cast<double>(N));
        w.upper = std::max(w.upper, xp * wilson_interval(count, N, level).upper);
    }
    return w;
}

std::string to_string(Route r) { return r == Route::g ? "G" : "H"; }

// McDiarmid's increment ranges are only finite once the lags are conditioned on.
Route route_for(BoundKind kind) {
    return bound_needs_c2(kind) || kind == BoundKind::mcdiarmid ? Route::g : Route::h;
}

LipschitzTable table_for(const ProcessSpec& spec, Route route, std::size_t n) {
    if (route == Route::g) return build_lipschitz_table(domination_profile(spec).profile, n);
    return build_lipschitz_table(contraction_certificate(spec).profile, n);
}

std::vector<std::string> spec_flags(const ProcessSpec& spec, Route route) {
    std::vector<std::string> flags;
    const auto cert = contraction_certificate(spec);
    if (cert.experimental) flags.push_back("experimental");
    if (route == Route::g && supports_c2(spec) && domination_profile(spec).conditional_on_lags)
        flags.push_back("conditional_on_lags");
    if (spec.lag_law.truncated_mass() > 0.0) flags.push_back("lag_law_truncated");
    return flags;
}

namespace {

// Mean of fn(G) over the innovation law: exact on atoms, otherwise a Monte
// Carlo point estimate and upper confidence limit.
struct Expectation {
    double mean = 0.0;
    double upper = 0.0;
    Provenance provenance;
};

class GSampler {
public:
    GSampler(const InnovationLaw& law, std::size_t samples, std::uint64_t seed, double level, std::size_t threads)
        : level_(level) {
        if (auto atoms = law.atoms()) {
            for (const auto& [v, p] : *atoms) atoms_.emplace_back(law.dominating_g(v), p);
            return;
        }
        if (samples < 2) throw DomainError("dominating constants: need at least two samples");
        values_.resize(samples);
        parallel_blocks(samples, threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                CounterStream rng(seed, StreamPurpose::dominating, i, 0);
                values_[i] = law.dominating_g(law.sample(rng));
            }
        });
    }

    bool analytic() const { return !atoms_.empty(); }
    const std::vector<double>& values() const { return values_; }

    template <class Fn>
    Expectation expect(Fn fn) const {
        Expectation e;
        if (analytic()) {
            for (const auto& [g, p] : atoms_) e.mean += p * fn(g);
            e.upper = e.mean;
            return e;
        }
        std::vector<double> v(values_.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(values_[i]);
        const auto ms = mean_sd(v);
        e.mean = ms.mean;
        e.upper = ms.mean + two_sided_z(level_) * ms.sd / std::sqrt(static_cast<double>(v.size()));
        e.provenance = {Provenance::Source::mc_upper_ci, level_, v.size()};
        return e;
    }

    // Samples of G for weak-norm estimation (atoms expanded is not needed:
    // the weak norm of a discrete law is computed exactly).
    WeakNorm weak_norm(double p) const {
        if (!analytic()) return estimate_weak_norm(values_, p, level_);
        WeakNorm w;
        for (const auto& [g, unused] : atoms_) {
            (void)unused;
            double tail = 0.0;
            for (const auto& [h, q] : atoms_)
                if (h >= g) tail += q;
            w.estimate = std::max(w.estimate, std::pow(g, p) * tail);
        }
        w.upper = w.estimate;
        return w;
    }

private:
    double level_;
    std::vector<std::pair<double, double>> atoms_;
    std::vector<double> values_;
};

class HSampler {
public:
    HSampler(const ProcessSpec& spec, std::size_t n, std::size_t samples, std::uint64_t seed, double level,
             std::size_t threads)
        : n_(n), samples_(samples), level_(level), h_(n * samples) {
        if (samples < 2) throw DomainError("dominating constants: need at least two samples");
        const ProcessModel model(spec);
        const std::uint64_t hseed = mix64(seed ^ 0x48a5e11ULL);
        parallel_blocks(samples, threads, [&](std::size_t b, std::size_t e) {
            std::vector<double> path(n), hv(n), scratch;
            for (std::size_t i = b; i < e; ++i) {
                model.simulate_with_h(hseed, i, path, hv, scratch);
                for (std::size_t k = 0; k < n; ++k) h_[k * samples_ + i] = hv[k];
            }
        });
    }

    // Per-time expectations of fn(H_k).
    template <class Fn>
    std::vector<Expectation> expect(Fn fn) const {
        std::vector<Expectation> out(n_);
        std::vector<double> v(samples_);
        for (std::size_t k = 0; k < n_; ++k) {
            for (std::size_t i = 0; i < samples_; ++i) v[i] = fn(h_[k * samples_ + i]);
            const auto ms = mean_sd(v);
            out[k].mean = ms.mean;
            out[k].upper = ms.mean + two_sided_z(level_) * ms.sd / std::sqrt(static_cast<double>(samples_));
            out[k].provenance = {Provenance::Source::mc_upper_ci, level_, samples_};
        }
        return out;
    }

    std::vector<WeakNorm> weak_norms(double p) const {
        std::vector<WeakNorm> out(n_);
        for (std::size_t k = 0; k < n_; ++k)
            out[k] = estimate_weak_norm(
                std::vector<double>(h_.begin() + static_cast<std::ptrdiff_t>(k * samples_),
                                    h_.begin() + static_cast<std::ptrdiff_t>((k + 1) * samples_)),
                p, level_);
        return out;
    }

private:
    std::size_t n_, samples_;
    double level_;
    std::vector<double> h_;  // [k][replicate]
};

double factorial(int l) { return std::tgamma(static_cast<double>(l) + 1.0); }

void record(DominatingSpec& d, const std::string& name, const Provenance& p) { d.provenance[name] = p; }

std::vector<double> uppers(const std::vector<Expectation>& e) {
    std::vector<double> v(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) v[i] = e[i].upper;
    return v;
}

}  // namespace

DominatingSpec estimate_dominating_constants(const ProcessSpec& spec, std::size_t n, const DominatingRequest& req,
                                             std::uint64_t seed) {
    if (n == 0) throw DomainError("horizon n must be >= 1");
    check_level(req.ci_level);
    const bool c2 = supports_c2(spec);
    const bool h_kind = req.kind == DominatingKind::subgaussian || req.kind == DominatingKind::semiexp_h;
    const bool g_kind = req.kind == DominatingKind::bernstein || req.kind == DominatingKind::cramer ||
                        req.kind == DominatingKind::semiexp_g || req.kind == DominatingKind::bounded;
    Route route = req.route.value_or(c2 ? Route::g : Route::h);
    if (h_kind) route = Route::h;
    if (g_kind && route == Route::h)
        throw UnsupportedError(to_string(req.kind) + " constants are stated for G and need the innovation-Lipschitz condition");
    if (route == Route::g && !c2)
        throw UnsupportedError(to_string(spec.family) + ": the innovation-Lipschitz condition fails; G-based constants unavailable");

    DominatingSpec d;
    d.kind = req.kind;
    d.flags = spec_flags(spec, route);
    d.flags.push_back(route == Route::g ? "route_G" : "route_H");
    const auto& law = spec.innovation;

    if (route == Route::g) {
        const GSampler g(law, req.samples, seed, req.ci_level, req.threads);
        const auto second = g.expect([](double x) { return x * x; });
        auto fill = [n](double v) { return std::vector<double>(n, v); };
        switch (req.kind) {
            case DominatingKind::bernstein: {
                d.V = fill(second.upper);
                record(d, "V", second.provenance);
                const auto sup = law.g_essential_sup();
                const int L = sup ? 40 : 12;
                double m = 0.0;
                Provenance prov = second.provenance;
                if (second.mean > 0.0) {
                    for (int l = 3; l <= L; ++l) {
                        const auto ml = g.expect([l](double x) { return std::pow(x, l); });
                        if (ml.provenance.source == Provenance::Source::mc_upper_ci) prov = ml.provenance;
                        m = std::max(m, std::pow(2.0 * ml.upper / (factorial(l) * second.upper), 1.0 / (l - 2)));
                    }
                }
                if (sup) {
                    // beyond L: E[G^l] <= sup^(l-2) E[G^2], so the ratio is at most sup (2/l!)^(1/(l-2))
                    m = std::max(m, *sup * std::pow(2.0 / factorial(L + 1), 1.0 / (L - 1)));
                    m = std::min(m, *sup);
                } else {
                    d.flags.push_back("moment_fit_l_le_12");
                }
                d.M = m;
                record(d, "M", prov);
                break;
            }
            case DominatingKind::cramer: {
                if (!(req.t0 > 0.0)) throw DomainError("cramer: t0 must be positive");
                const double t0 = req.t0;
                const auto k = g.expect([t0](double x) { return std::exp(t0 * x); });
                d.t0 = t0;
                d.K = fill(std::max(1.0, k.upper));
                record(d, "K", k.provenance);
                break;
            }
            case DominatingKind::semiexp_g: {
                if (!(req.p > 0.0 && req.p < 1.0)) throw DomainError("semiexp_g: p must lie in (0, 1)");
                const double p = req.p;
                const auto k = g.expect([p](double x) { return x * x * std::exp(std::pow(x, p)); });
                d.p = p;
                d.K = fill(k.upper);
                record(d, "K", k.provenance);
                break;
            }
            case DominatingKind::bounded: {
                const auto sup = law.g_essential_sup();
                const auto range = law.increment_range();
                if (!sup || !range) throw UnsupportedError("bounded constants need a bounded innovation law");
                d.M = *sup;
                d.V = fill(second.upper);
                d.Mk = fill(*range);
                record(d, "M", {});
                record(d, "Mk", {});
                record(d, "V", second.provenance);
                break;
            }
            case DominatingKind::pth_moment: {
                const double p = req.p;
                if (!(p >= 1.0)) throw DomainError("pth_moment: p must be >= 1");
                const auto a = g.expect([p](double x) { return std::pow(x, p); });
                d.p = p;
                d.A = fill(a.upper);
                d.V = fill(second.upper);
                record(d, "A", a.provenance);
                record(d, "V", second.provenance);
                break;
            }
            case DominatingKind::weak_pth: {
                const double p = req.p;
                if (!(p > 1.0)) throw DomainError("weak_pth: p must be > 1");
                const auto w = g.weak_norm(p);
                d.p = p;
                d.A = fill(w.upper);
                d.V = fill(second.upper);
                record(d, "A", g.analytic() ? Provenance{} : Provenance{Provenance::Source::mc_upper_ci, req.ci_level, req.samples});
                record(d, "V", second.provenance);
                if (p >= 2.0) {
                    d.max_norm = estimate_max_weighted_norm(spec, table_for(spec, Route::g, n), p, true, req.samples,
                                                            seed, req.ci_level, req.threads);
                    record(d, "max_norm", {Provenance::Source::mc_upper_ci, req.ci_level, req.samples});
                }
                break;
            }
            default: break;
        }
        return d;
    }

    const HSampler h(spec, n, req.samples, seed, req.ci_level, req.threads);
    const Provenance mc{Provenance::Source::mc_upper_ci, req.ci_level, req.samples};
    switch (req.kind) {
        case DominatingKind::subgaussian: {
            const auto second = h.expect([](double x) { return x * x; });
            d.V = uppers(second);
            double eps = 0.0;
            for (int l = 3; l <= 12; ++l) {
                const auto ml = h.expect([l](double x) { return std::pow(x, l); });
                for (std::size_t k = 0; k < n; ++k) {
                    if (!(second[k].mean > 0.0)) continue;
                    const double r = 2.0 * ml[k].upper * std::pow(l - 1.0, l / 2.0) / (factorial(l) * second[k].mean);
                    eps = std::max(eps, std::pow(r, 1.0 / (l - 2)));
                }
            }
            d.epsilon = eps;
            d.flags.push_back("moment_fit_l_le_12");
            record(d, "V", mc);
            record(d, "epsilon", mc);
            break;
        }
        case DominatingKind::semiexp_h: {
            if (!(req.alpha > 0.0 && req.alpha < 1.0)) throw DomainError("semiexp_h: alpha must lie in (0, 1)");
            const double q = 2.0 * req.alpha / (1.0 - req.alpha);
            const auto c = h.expect([q](double x) { return std::exp(std::pow(x, q)); });
            d.alpha = req.alpha;
            d.C1 = 0.0;
            for (const auto& e : c) d.C1 = std::max(d.C1, e.upper);
            d.flags.push_back("trajectory_dependent");
            record(d, "C1", mc);
            break;
        }
        case DominatingKind::pth_moment: {
            const double p = req.p;
            if (!(p >= 1.0)) throw DomainError("pth_moment: p must be >= 1");
            d.p = p;
            d.A = uppers(h.expect([p](double x) { return std::pow(x, p); }));
            d.V = uppers(h.expect([](double x) { return x * x; }));
            record(d, "A", mc);
            record(d, "V", mc);
            break;
        }
        case DominatingKind::weak_pth: {
            const double p = req.p;
            if (!(p > 1.0)) throw DomainError("weak_pth: p must be > 1");
            d.p = p;
            for (const auto& w : h.weak_norms(p)) d.A.push_back(w.upper);
            d.V = uppers(h.expect([](double x) { return x * x; }));
            record(d, "A", mc);
            record(d, "V", mc);
            break;
        }
        default: break;
    }
    return d;
}

double estimate_max_weighted_norm(const ProcessSpec& spec, const LipschitzTable& table, double p, bool weak,
                                  std::size_t samples, std::uint64_t seed, double level, std::size_t threads) {
    if (!(p >= 1.0)) throw DomainError("max weighted norm: p must be >= 1");
    if (samples < 2) throw DomainError("max weighted norm: need at least two samples");
    if (!supports_c2(spec)) throw UnsupportedError("max weighted norm is defined through G and needs the innovation-Lipschitz condition");
    const auto& law = spec.innovation;
    const std::size_t n = table.horizon();
    const auto w = table.increment_weights();
    std::vector<double> m(samples);
    const std::uint64_t mseed = mix64(seed ^ 0x3a7ULL);
    parallel_blocks(samples, threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            double best = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                CounterStream rng(mseed, StreamPurpose::dominating, i, k);
                best = std::max(best, w[k - 1] * law.dominating_g(law.sample(rng)));
            }
            m[i] = best;
        }
    });
    if (weak) return estimate_weak_norm(m, p, level).upper;
    std::vector<double> mp(samples);
    for (std::size_t i = 0; i < samples; ++i) mp[i] = std::pow(m[i], p);
    const auto ms = mean_sd(mp);
    return std::pow(ms.mean + two_sided_z(level) * ms.sd / std::sqrt(static_cast<double>(samples)), 1.0 / p);
}

VerificationReport compare_bound(const EmpiricalEstimate& upper_tail, const EmpiricalEstimate& abs_tail,
                                 BoundKind kind, const DominatingSpec& dominating, const LipschitzTable& table,
                                 const std::vector<std::string>& flags) {
    if (upper_tail.x_grid != abs_tail.x_grid) throw DomainError("compare_bound: tail grids differ");
    VerificationReport r;
    r.bound_kind = to_string(kind);
    r.route = route_for(kind);
    r.dominating = dominating;
    r.flags = flags;
    r.spec_digest = upper_tail.spec_digest;
    r.seed = upper_tail.seed;
    r.replicates = upper_tail.replicates;
    r.ci_level = upper_tail.ci_level;
    std::size_t passed = 0, consistent = 0;
    bool first = true;
    for (std::size_t i = 0; i < upper_tail.x_grid.size(); ++i) {
        ThresholdCheck c;
        c.x = upper_tail.x_grid[i];
        c.x_effective = c.x - 3.0 * upper_tail.center_se;
        const auto b = evaluate_bound(kind, dominating, table, c.x_effective, Side::upper);
        const auto& est = b.native_two_sided ? abs_tail : upper_tail;
        r.side = b.native_two_sided ? Side::two_sided : Side::upper;
        c.empirical = est.tail_freq[i];
        c.empirical_lower = est.lower_ci[i];
        c.empirical_upper = est.upper_ci[i];
        c.bound = b.value;
        c.bound_valid = b.valid;
        c.pass = c.empirical_upper <= c.bound;
        c.consistent = c.empirical_lower <= c.bound;
        passed += c.pass;
        consistent += c.consistent;
        if (first && b.valid) {
            for (const auto& [k, v] : b.aggregates)
                if (k != "native_x") r.aggregates[k] = v;
            for (const auto& note : b.notes)
                if (std::find(r.flags.begin(), r.flags.end(), note) == r.flags.end()) r.flags.push_back(note);
            first = false;
        }
        r.checks.push_back(c);
    }
    const double m = static_cast<double>(std::max<std::size_t>(1, r.checks.size()));
    r.coverage = static_cast<double>(passed) / m;
    r.consistency = static_cast<double>(consistent) / m;
    return r;
}

VerificationReport verify_bound(const ProcessSpec& spec, const FunctionalSpec& f, std::size_t n, BoundKind kind,
                                const DominatingSpec& dominating, const std::vector<double>& x_grid,
                                std::size_t replicates, std::uint64_t seed, const TailOptions& options) {
    const Route route = route_for(kind);
    if (route == Route::g && !supports_c2(spec))
        throw UnsupportedError("bound " + to_string(kind) + " needs the innovation-Lipschitz condition, which " +
                               to_string(spec.family) + " does not satisfy");
    for (double x : x_grid)
        if (!(x > 0.0)) throw DomainError("verify: thresholds must be positive");
    const auto table = table_for(spec, route, n);
    const auto c = centered_sample(spec, f, n, replicates, seed, options.threads);
    const auto up = finish_estimate(c, x_grid, Side::upper, options.ci_level, seed);
    const auto ab = finish_estimate(c, x_grid, Side::two_sided, options.ci_level, seed);
    return compare_bound(up, ab, kind, dominating, table, spec_flags(spec, route));
}

}  // namespace imdev

#include "imdev/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "imdev/errors.hpp"

namespace imdev {

namespace {

ProcessModel instance_model(const FiniteInstance& inst) {
    ProcessSpec spec = inst.map;
    std::size_t max_lag = 1;
    for (const auto& a : inst.alphabets)
        for (const auto& l : a) max_lag = std::max(max_lag, l.draw.lag);
    spec.lag_law = LagLaw::uniform(max_lag);
    spec.memory_truncation = std::max(inst.horizon() + inst.initial_past.size(), max_lag);
    return ProcessModel::unchecked(std::move(spec));
}

// Reversed window: (x_{k-1}, ..., x_1, pre-history).
std::vector<double> make_past(std::span<const double> prefix, const std::vector<double>& pre) {
    std::vector<double> past;
    past.reserve(prefix.size() + pre.size());
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) past.push_back(*it);
    past.insert(past.end(), pre.begin(), pre.end());
    return past;
}

double ratio(double num, double den) {
    num = std::abs(num);
    if (den > 0.0) return num / den;
    return num <= 1e-13 ? 0.0 : std::numeric_limits<double>::infinity();
}

double alphabet_g(const std::vector<Letter>& alphabet, double y) {
    double g = 0.0;
    for (const auto& l : alphabet) g += l.prob * std::abs(y - l.draw.value);
    return g;
}

}  // namespace

std::size_t FiniteInstance::path_count() const {
    std::size_t count = 1;
    for (const auto& a : alphabets) {
        if (a.empty() || count > kMaxPaths / a.size()) return kMaxPaths + 1;
        count *= a.size();
    }
    return count;
}

void FiniteInstance::validate() const {
    if (alphabets.empty() || alphabets.size() > kMaxHorizon)
        throw DomainError("finite instance: horizon must be in [1, 8]");
    for (const auto& a : alphabets) {
        double total = 0.0;
        for (const auto& l : a) {
            if (!(l.prob >= 0.0)) throw DomainError("finite instance: negative probability");
            total += l.prob;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw DomainError("finite instance: alphabet probabilities must sum to 1");
    }
    if (path_count() > kMaxPaths) throw DomainError("finite instance: more than 1e6 paths");
}

ContractionProfile instance_certificate(const FiniteInstance& inst) {
    const std::size_t n = inst.horizon();
    const std::size_t L = n + inst.initial_past.size();
    std::vector<double> v(std::max<std::size_t>(L, 1), 0.0);
    const auto& m = inst.map;
    for (std::size_t i = 1; i <= v.size(); ++i) {
        const double a = std::abs(m.coefficients.at(i));
        double worst = 0.0;
        for (const auto& alphabet : inst.alphabets) {
            double w = 0.0;
            switch (m.family) {
                case Family::memory_one_infinite:
                    for (const auto& l : alphabet)
                        if (l.draw.lag == i) w += l.prob;
                    w *= a;
                    break;
                case Family::random_memory_ar:
                    for (const auto& l : alphabet)
                        if (l.draw.lag >= i) w += l.prob;
                    w *= a;
                    break;
                case Family::mean_field_memory: w = m.response.lipschitz() * a; break;
                case Family::arch_type:
                    for (const auto& l : alphabet) w += l.prob * std::abs(l.draw.value);
                    w *= a;
                    break;
                case Family::step_reinforced_erw:
                    throw UnsupportedError("finite instance: ERW maps are not supported");
            }
            worst = std::max(worst, w);
        }
        v[i - 1] = worst;
    }
    return ContractionProfile(std::move(v));
}

bool instance_supports_c2(const FiniteInstance& inst) {
    const auto f = inst.map.family;
    if (f == Family::arch_type || f == Family::step_reinforced_erw) return false;
    if (f == Family::mean_field_memory) return true;
    for (const auto& alphabet : inst.alphabets)
        for (const auto& l : alphabet)
            if (l.draw.lag != alphabet.front().draw.lag) return false;
    return true;
}

DecompositionReport enumerate_decomposition(const FiniteInstance& inst) {
    inst.validate();
    const ProcessModel model = instance_model(inst);
    const std::size_t n = inst.horizon();
    const std::size_t P = inst.path_count();

    // Node values level by level; node m at level k has parent m / A_k.
    std::vector<std::size_t> level_size(n + 1, 1);
    for (std::size_t k = 1; k <= n; ++k) level_size[k] = level_size[k - 1] * inst.alphabets[k - 1].size();
    std::vector<std::vector<double>> xs(n + 1);
    std::vector<double> prefix;
    for (std::size_t k = 1; k <= n; ++k) {
        const std::size_t A = inst.alphabets[k - 1].size();
        xs[k].resize(level_size[k]);
        for (std::size_t m = 0; m < level_size[k]; ++m) {
            prefix.assign(k - 1, 0.0);
            std::size_t node = m / A;
            for (std::size_t j = k - 1; j >= 1; --j) {
                prefix[j - 1] = xs[j][node];
                node /= inst.alphabets[j - 1].size();
            }
            const auto past = make_past(prefix, inst.initial_past);
            xs[k][m] = model.step(past, inst.alphabets[k - 1][m % A].draw);
        }
    }

    // g at every level, from the leaves up.
    std::vector<std::vector<double>> gl(n + 1);
    gl[n].resize(P);
    std::vector<double> path(n);
    for (std::size_t leaf = 0; leaf < P; ++leaf) {
        std::size_t node = leaf;
        for (std::size_t k = n; k >= 1; --k) {
            path[k - 1] = xs[k][node];
            node /= inst.alphabets[k - 1].size();
        }
        gl[n][leaf] = inst.functional(path);
    }
    for (std::size_t k = n; k >= 1; --k) {
        const auto& alphabet = inst.alphabets[k - 1];
        const std::size_t A = alphabet.size();
        gl[k - 1].assign(level_size[k - 1], 0.0);
        for (std::size_t m = 0; m < level_size[k - 1]; ++m)
            for (std::size_t c = 0; c < A; ++c) gl[k - 1][m] += alphabet[c].prob * gl[k][m * A + c];
    }

    DecompositionReport r;
    r.horizon = n;
    r.paths = P;
    r.mean_f = gl[0][0];
    r.path_prob.assign(P, 1.0);
    r.x.assign(n, std::vector<double>(P));
    r.g.assign(n + 1, std::vector<double>(P));
    r.d.assign(n, std::vector<double>(P));
    r.letter.assign(n, std::vector<std::size_t>(P));
    for (std::size_t leaf = 0; leaf < P; ++leaf) {
        std::size_t node = leaf;
        std::vector<std::size_t> nodes(n + 1);
        for (std::size_t k = n; k >= 1; --k) {
            nodes[k] = node;
            const std::size_t A = inst.alphabets[k - 1].size();
            r.letter[k - 1][leaf] = node % A;
            r.path_prob[leaf] *= inst.alphabets[k - 1][node % A].prob;
            node /= A;
        }
        nodes[0] = 0;
        for (std::size_t k = 0; k <= n; ++k) r.g[k][leaf] = gl[k][nodes[k]];
        double telescoped = 0.0;
        for (std::size_t k = 1; k <= n; ++k) {
            r.x[k - 1][leaf] = xs[k][nodes[k]];
            r.d[k - 1][leaf] = r.g[k][leaf] - r.g[k - 1][leaf];
            telescoped += r.d[k - 1][leaf];
        }
        r.telescoping_error =
            std::max(r.telescoping_error, std::abs(telescoped - (r.g[n][leaf] - r.mean_f)));
    }
    // Conditional means of d_k over each level-(k-1) atom.
    for (std::size_t k = 1; k <= n; ++k) {
        const auto& alphabet = inst.alphabets[k - 1];
        const std::size_t A = alphabet.size();
        for (std::size_t m = 0; m < level_size[k - 1]; ++m) {
            double cm = 0.0;
            for (std::size_t c = 0; c < A; ++c)
                cm += alphabet[c].prob * (gl[k][m * A + c] - gl[k - 1][m]);
            r.martingale_error = std::max(r.martingale_error, std::abs(cm));
        }
    }
    return r;
}

namespace {

double future_expectation(const FiniteInstance& inst, const ProcessModel& model,
                          std::vector<double>& path, std::size_t k) {
    const std::size_t n = inst.horizon();
    if (k == n) return inst.functional(path);
    const auto past = make_past(std::span<const double>(path.data(), k), inst.initial_past);
    double e = 0.0;
    for (const auto& l : inst.alphabets[k]) {
        path[k] = model.step(past, l.draw);
        e += l.prob * future_expectation(inst, model, path, k + 1);
    }
    return e;
}

}  // namespace

double conditional_expectation(const FiniteInstance& inst, std::span<const double> prefix) {
    inst.validate();
    if (prefix.size() > inst.horizon()) throw DomainError("conditional_expectation: prefix too long");
    const ProcessModel model = instance_model(inst);
    std::vector<double> path(inst.horizon(), 0.0);
    std::copy(prefix.begin(), prefix.end(), path.begin());
    return future_expectation(inst, model, path, prefix.size());
}

RatioResult verify_increment_domination(const FiniteInstance& inst, const LipschitzTable& table,
                                        DecompositionReport* report) {
    const std::size_t n = inst.horizon();
    if (table.horizon() != n) throw DomainError("verify_increment_domination: table horizon mismatch");
    DecompositionReport local;
    DecompositionReport& r = report ? *report : local;
    if (r.paths == 0) r = enumerate_decomposition(inst);
    const ProcessModel model = instance_model(inst);
    RatioResult out;
    out.used_g = instance_supports_c2(inst);
    std::vector<double> prefix;
    for (std::size_t leaf = 0; leaf < r.paths; ++leaf) {
        for (std::size_t k = 1; k <= n; ++k) {
            const auto& alphabet = inst.alphabets[k - 1];
            const Letter& l = alphabet[r.letter[k - 1][leaf]];
            double dom;
            if (out.used_g) {
                dom = alphabet_g(alphabet, l.draw.value);
            } else {
                prefix.resize(k - 1);
                for (std::size_t j = 1; j < k; ++j) prefix[j - 1] = r.x[j - 1][leaf];
                const auto past = make_past(prefix, inst.initial_past);
                const double v = model.step(past, l.draw);
                dom = 0.0;
                for (const auto& other : alphabet) dom += other.prob * std::abs(v - model.step(past, other.draw));
            }
            const double w = table.increment_weight(k);
            out.max_ratio = std::max(out.max_ratio, ratio(r.d[k - 1][leaf], w * dom));
        }
    }
    r.domination_ratio = out.max_ratio;
    r.domination_used_g = out.used_g;
    return out;
}

RatioResult verify_g_lipschitz(const FiniteInstance& inst, const LipschitzTable& table,
                               DecompositionReport* report) {
    const std::size_t n = inst.horizon();
    if (table.horizon() != n) throw DomainError("verify_g_lipschitz: table horizon mismatch");
    DecompositionReport local;
    DecompositionReport& r = report ? *report : local;
    if (r.paths == 0) r = enumerate_decomposition(inst);
    RatioResult out;
    out.used_g = instance_supports_c2(inst);

    static constexpr double kMoves[] = {-1.3, -0.37, 0.37, 1.3};
    static constexpr std::size_t kMaxPrefixes = 256;

    for (std::size_t k = 1; k <= n; ++k) {
        // Distinct realized prefixes at level k, each represented by a leaf.
        std::vector<std::size_t> reps;
        std::size_t stride = 1;
        for (std::size_t j = k + 1; j <= n; ++j) stride *= inst.alphabets[j - 1].size();
        for (std::size_t leaf = 0; leaf < r.paths && reps.size() < kMaxPrefixes; leaf += stride)
            reps.push_back(leaf);

        auto weight = [&](std::size_t l) { return table.at(n - k, n - l); };
        std::vector<double> x(k), y(k);
        for (std::size_t a : reps) {
            for (std::size_t j = 0; j < k; ++j) x[j] = r.x[j][a];
            const double gx = r.g[k][a];
            // single-coordinate moves off the realized support
            for (std::size_t l = 1; l <= k; ++l) {
                for (double move : kMoves) {
                    y = x;
                    y[l - 1] += move;
                    const double gy = conditional_expectation(inst, y);
                    out.max_ratio = std::max(out.max_ratio, ratio(gy - gx, weight(l) * std::abs(move)));
                }
            }
            // realized pairs
            for (std::size_t b : reps) {
                if (b <= a) continue;
                double bound = 0.0;
                for (std::size_t l = 1; l <= k; ++l) bound += weight(l) * std::abs(r.x[l - 1][a] - r.x[l - 1][b]);
                out.max_ratio = std::max(out.max_ratio, ratio(r.g[k][b] - gx, bound));
            }
        }
    }
    r.lipschitz_ratio = out.max_ratio;
    return out;
}

}  // namespace imdev

// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "imdev/bounds.hpp"
#include "imdev/coefficients.hpp"
#include "imdev/monte_carlo.hpp"
#include "imdev/oracle.hpp"
#include "imdev/serialize.hpp"
#include "imdev/special_functions.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace imdev;
namespace fs = std::filesystem;
namespace t = imdev::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> lines;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            lines.push_back("violated: " + what);
        }
    }
    template <class... Args>
    void note(fmt::format_string<Args...> f, Args&&... args) {
        lines.push_back(fmt::format(f, std::forward<Args>(args)...));
    }
};

fs::path scratch() {
    static const fs::path d = [] {
        auto p = fs::temp_directory_path() / ("imdev_acceptance_" + std::to_string(::getpid()));
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd =
        fmt::format("\"{}\" {} >> \"{}\" 2>&1", IMDEV_BIN, args, (scratch() / "cli.log").string());
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path config_path(const std::string& name) { return fs::path(IMDEV_SOURCE_DIR) / "configs" / name; }

std::vector<fs::path> files_with_prefix(const fs::path& dir, const std::string& prefix) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename().string().rfind(prefix, 0) == 0) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

// ------------------------------------------------------------------ 1

Outcome coefficient_recursion() {
    Outcome o;
    CounterStream rng(2024, StreamPurpose::generic, 1, 0);
    double worst = 0.0;
    int monotone_checked = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t L = 1 + rng.below(20);
        std::vector<double> a(L);
        double s = 0.0;
        for (auto& x : a) s += (x = rng.uniform());
        const double target = 0.95 * rng.uniform();
        for (auto& x : a) x *= target / s;
        if (rep % 2 == 0) std::sort(a.begin(), a.end(), std::greater<>());
        const ContractionProfile p(a);
        const std::size_t n = 50;
        const auto table = build_lipschitz_table(p, n);
        t::BruteTable b;
        b.a.assign(1, 0.0);
        b.a.insert(b.a.end(), a.begin(), a.end());
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = k; i < n; ++i) worst = std::max(worst, t::rel_err(table.at(k, i), b.at(k, i)));
            worst = std::max(worst, t::rel_err(table.diagonal(k), t::unrolled(b, k, k)));
        }
        if (p.non_increasing(n)) {
            const auto c = check_diagonal(p, table);
            ++monotone_checked;
            o.require(c.monotone, fmt::format("diagonal non-decreasing (profile {})", rep));
            o.require(c.within_uniform_bound, fmt::format("diagonal under (1+max a)/(1-sum a) (profile {})", rep));
        }
    }
    o.require(worst <= 1e-12, "table vs literal recursion to 1e-12");
    o.require(monotone_checked >= 50, "at least 50 non-increasing profiles checked");
    o.note("max relative error {:.3g}; {} non-increasing profiles checked", worst, monotone_checked);
    return o;
}

// ------------------------------------------------------------------ 2

Outcome young_chain() {
    Outcome o;
    double worst_grid = 0.0;
    for (int i = 1; i <= 999; ++i) {
        const double x = 0.999 * i / 1000.0;
        const auto det = rio_ell_star_detail(x);
        const double mid = (x * x - 2.0 * x) * std::log1p(-x);
        const double low = 2.0 * x * x + std::pow(x, 4) / 6.0;
        if (!(det.value >= mid - 1e-14) || !(mid >= low - 1e-14)) {
            o.require(false, fmt::format("chain at x = {}", x));
            break;
        }
        // dense grid in t around the bisection maximizer
        double best = -1e300;
        for (int j = -4000; j <= 4000; ++j) {
            const double tt = det.argmax * (1.0 + j * 5e-6);
            if (tt > 0.0) best = std::max(best, x * tt - rio_ell(tt));
        }
        worst_grid = std::max(worst_grid, std::abs(best - det.value));
    }
    o.require(worst_grid <= 1e-8, "bisection vs dense grid to 1e-8");
    o.note("999 grid points; max |bisection - dense grid| = {:.3g}", worst_grid);
    return o;
}

// ------------------------------------------------------------------ 3

Outcome hoeffding_ordering() {
    Outcome o;
    std::size_t points = 0;
    double worst_limit = 0.0;
    for (double n : {1.0, 10.0, 100.0, 1000.0}) {
        for (int iv = 1; iv <= 100; ++iv) {
            const double v = 0.1 * iv;
            for (int ix = 0; ix <= 200; ++ix) {
                const double x = n * ix / 200.0;
                const double h = log_hn_function(x, v, n), b = log_bennett_b(x, v), b1 = log_bernstein_b1(x, v);
                ++points;
                if (!std::isfinite(h) || !std::isfinite(b) || !std::isfinite(b1) ||
                    h > b + 1e-12 * (1.0 + std::abs(b)) || b > b1 + 1e-12 * (1.0 + std::abs(b1))) {
                    o.require(false, fmt::format("H <= B <= B1 at n={} v={} x={}", n, v, x));
                    return o;
                }
            }
            const double at_n = hn_function(n, v, n);
            const double closed = std::pow(v * v / (n + v * v), n);
            o.require(t::rel_err(at_n, closed) <= 1e-12, fmt::format("H_n(n, v) closed form at n={} v={}", n, v));
            worst_limit = std::max(worst_limit, t::rel_err(hn_function(n * (1.0 - 1e-12), v, n), at_n));
        }
    }
    o.require(worst_limit <= 1e-8, "x -> n- limit to 1e-8");
    o.note("{} grid points in log space; max |H(n-) - H(n)| relative {:.3g}", points, worst_limit);
    return o;
}

// ------------------------------------------------------------------ 4

Outcome closed_form_optimizers() {
    Outcome o;
    CounterStream rng(404, StreamPurpose::generic, 4, 0);
    auto logu = [&] { return std::pow(10.0, -3.0 + 6.0 * rng.uniform()); };
    double wb = 0.0, wc = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double x = logu(), v = logu(), delta = logu();
        auto db = [&](double s) {
            const double r = 1.0 - s * delta;
            return -x + v * s * (2.0 - s * delta) / (2.0 * r * r);
        };
        wb = std::max(wb, t::rel_err(bernstein_optimal_t(x, v, delta), t::bisect_root(db, 0.0, 1.0 / delta)));
        const auto b = bernstein_bound(x, v, delta);
        o.require(b.raw <= *b.looser * (1.0 + 1e-14), "bernstein sharper <= looser");

        const double k = logu();
        auto dc = [&](double s) {
            const double r = 1.0 - s / delta;
            return -x + k / (delta * delta) * s * (2.0 - s / delta) / (r * r);
        };
        wc = std::max(wc, t::rel_err(cramer_optimal_t(x, k, delta), t::bisect_root(dc, 0.0, delta)));
        const auto c = cramer_bound(x, k, delta);
        o.require(c.raw <= *c.looser * (1.0 + 1e-14), "cramer sharper <= looser");
    }
    o.require(wb <= 1e-8, "bernstein t* to 1e-8");
    o.require(wc <= 1e-8, "cramer t* to 1e-8");
    o.note("1000 tuples; max relative t error: bernstein {:.3g}, cramer {:.3g}", wb, wc);
    return o;
}

// ------------------------------------------------------------------ 5

Outcome martingale_oracle() {
    Outcome o;
    CounterStream rng(555, StreamPurpose::generic, 5, 0);
    double tel = 0.0, mart = 0.0, dom = 0.0, lip = 0.0, cond = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const auto inst = t::random_instance(rng, rep % 2 == 1);
        auto report = enumerate_decomposition(inst);
        tel = std::max(tel, report.telescoping_error);
        mart = std::max(mart, report.martingale_error);
        for (std::size_t k = 0; k <= inst.horizon(); ++k) {
            const auto means = t::grouped_means(inst, k);
            for (std::size_t path = 0; path < report.paths; ++path) {
                std::vector<std::size_t> key;
                for (std::size_t j = 0; j < k; ++j) key.push_back(report.letter[j][path]);
                cond = std::max(cond, std::abs(means.at(key) - report.g[k][path]));
            }
        }
        const auto table = build_lipschitz_table(instance_certificate(inst), inst.horizon());
        dom = std::max(dom, verify_increment_domination(inst, table, &report).max_ratio);
        lip = std::max(lip, verify_g_lipschitz(inst, table, &report).max_ratio);
    }
    o.require(tel <= 1e-12, "telescoping to 1e-12");
    o.require(mart <= 1e-12, "conditional mean zero to 1e-12");
    o.require(cond <= 1e-12, "conditional expectations vs independent enumerator");
    o.require(dom <= 1.0 + 1e-9, "domination ratio <= 1 + 1e-9");
    o.require(lip <= 1.0 + 1e-9, "Lipschitz ratio <= 1 + 1e-9");
    o.note("50 instances; telescoping {:.2g}, mean-zero {:.2g}, enumerator {:.2g}", tel, mart, cond);
    o.note("max domination ratio {:.12f}, max Lipschitz ratio {:.12f}", dom, lip);
    return o;
}

// ------------------------------------------------------------------ 6

Outcome exact_binomial() {
    Outcome o;
    const std::size_t n = 20, reps = 100000;
    const auto spec = t::iid_signs();
    DominatingRequest rq;
    rq.kind = DominatingKind::bounded;
    const auto d = estimate_dominating_constants(spec, n, rq, 6);
    const auto table = table_for(spec, Route::g, n);

    const ProcessModel model(spec);
    const auto s = sample_functional(model, FunctionalSpec(FunctionalSpec::Kind::sum), n, 0, reps, 6, 0);
    std::vector<double> grid;
    for (std::size_t x = 1; x <= n; ++x) grid.push_back(static_cast<double>(x));
    // E S = 0 exactly, so no centering
    const auto e = tail_from_samples(s, grid, Side::upper, 0.999);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double exact = t::binomial_upper_tail(n, grid[i]);
        const auto h = hoeffding_bound(d, table, grid[i]);
        o.require(h.value >= exact, fmt::format("hoeffding >= exact at x = {}", grid[i]));
        if (e.lower_ci[i] <= exact && exact <= e.upper_ci[i]) ++inside;
    }
    o.require(inside == grid.size(), "exact tail inside the 99.9% Wilson band at every threshold");
    o.note("hoeffding dominates at 20 thresholds; exact tail inside Wilson band at {}/{}", inside, grid.size());
    return o;
}

// ------------------------------------------------------------------ 7

Outcome coverage() {
    Outcome o;
    for (const char* name : {"memory_one_geometric.json", "mean_field_tanh.json"}) {
        const auto dir = scratch() / fmt::format("c7_{}", name);
        const int code = run_cli(fmt::format("verify --config \"{}\" --out \"{}\"", config_path(name).string(),
                                             dir.string()));
        o.require(code == 0, fmt::format("verify {} exit code {}", name, code));
        if (code != 0) continue;
        const auto doc = Json::parse(slurp(files_with_prefix(dir, "verify_").front().replace_extension(".json")));
        o.note("{} (n = {}, {} replicates, sqrt(V) = {:.4g})", name, doc["config"]["n"].get<int>(),
               doc["config"]["replicates"].get<int>(), doc["x_grid_reference"]["sqrt_v"].get<double>());
        for (const auto& r : doc["reports"]) {
            const double cov = r["coverage"].get<double>(), con = r["consistency"].get<double>();
            std::string misses;
            for (const auto& c : r["checks"])
                if (!c["pass"].get<bool>())
                    misses += fmt::format(" x={:.3g}(upper CI {:.3g} > bound {:.3g})", c["x"].get<double>(),
                                          c["empirical_upper"].get<double>(), c["bound"].get<double>());
            o.note("  {:<15} coverage {:.4f}  consistency {:.4f}{}", r["bound_kind"].get<std::string>(), cov, con,
                   misses.empty() ? "" : "  misses:" + misses);
            o.require(cov == 1.0, fmt::format("{} coverage 1.0 on {}", r["bound_kind"].get<std::string>(), name));
        }
    }
    return o;
}

// ------------------------------------------------------------------ 8

Outcome moment_bounds() {
    Outcome o;
    const std::size_t n = 200, reps = 100000;
    for (const auto& [label, spec] :
         {std::pair{"memory_one_geometric", t::memory_one_geometric()}, std::pair{"mean_field_tanh", t::mean_field_tanh()}}) {
        const ProcessModel model(spec);
        const auto s = sample_functional(model, FunctionalSpec(FunctionalSpec::Kind::sum), n, 0, reps, 8, 0);
        const auto g_table = table_for(spec, Route::g, n);
        const auto h_table = table_for(spec, Route::h, n);
        for (double p : {2.0, 4.0}) {
            DominatingRequest rq;
            rq.kind = DominatingKind::pth_moment;
            rq.p = p;
            rq.route = Route::g;
            const auto d = estimate_dominating_constants(spec, n, rq, 8);
            const double mz = mz_norm_bound(g_table, d.A, p);
            const auto m = moment_from_samples(s, p, 8, 0.99, 200);
            o.require(m.upper <= mz, fmt::format("{} ||S||_{} <= MZ", label, p));
            o.note("{} p={}: ||S||_p upper CI {:.4g} <= MZ {:.4g}", label, p, m.upper, mz);
            if (p == 4.0) {
                const double v = aggregate_v(g_table, d.V);
                const double mx = estimate_max_weighted_norm(spec, g_table, p, false, 20000, 8);
                const auto r = rosenthal_bound(v, mx, p);
                o.require(m.upper <= r.value, fmt::format("{} ||S||_4 <= Rosenthal", label));
                o.note("{} p=4: Rosenthal {:.4g} (c = {:.3g})", label, r.value, r.c);
            }
        }
        DominatingRequest rq;
        rq.kind = DominatingKind::pth_moment;
        rq.p = 1.5;
        rq.route = Route::h;
        rq.samples = 4000;
        const auto d = estimate_dominating_constants(spec, n, rq, 8);
        const double vbe = von_bahr_esseen(h_table, d.A, 1.5);
        const auto m = moment_from_samples(s, 1.5, 8, 0.99, 200);
        o.require(m.upper <= vbe, fmt::format("{} ||S||_1.5 <= VBE", label));
        o.note("{} p=1.5: ||S||_p upper CI {:.4g} <= VBE {:.4g}", label, m.upper, vbe);
    }
    return o;
}

// ------------------------------------------------------------------ 9

Outcome rates() {
    Outcome o;
    const auto spec = t::memory_one_geometric();
    std::vector<double> cr, sr;
    for (std::size_t n : {100, 200, 400, 800}) {
        DominatingRequest rq;
        rq.kind = DominatingKind::cramer;
        rq.t0 = 1.0;
        const auto d = estimate_dominating_constants(spec, n, rq, 9);
        const auto b = evaluate_bound(BoundKind::cramer, d, table_for(spec, Route::g, n), 0.5 * n);
        cr.push_back(-std::log(b.raw) / static_cast<double>(n));

        DominatingRequest rh;
        rh.kind = DominatingKind::semiexp_h;
        rh.alpha = 0.5;
        rh.samples = 2000;
        const auto dh = estimate_dominating_constants(spec, n, rh, 9);
        const auto table = table_for(spec, Route::h, n);
        // per-step threshold 8 a_{n-1}(n-1) puts the rate at exactly n^alpha
        const auto bh = semiexp_h_bound(dh, table, 8.0 * table.increment_weight(1));
        sr.push_back(-std::log(bh.raw) / std::pow(static_cast<double>(n), rh.alpha));
    }
    auto check = [&](const std::vector<double>& r, const char* what) {
        const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
        o.require(*lo > 0.0, fmt::format("{} rate positive", what));
        o.require(*hi <= 2.0 * *lo, fmt::format("{} rates within a factor 2", what));
        o.note("{}: {:.4g} {:.4g} {:.4g} {:.4g}", what, r[0], r[1], r[2], r[3]);
    };
    check(cr, "cramer -ln(bound)/n at x = n/2");
    check(sr, "semiexp_h -ln(bound)/n^0.5");
    return o;
}

// ------------------------------------------------------------------ 10

Outcome determinism() {
    Outcome o;
    std::vector<std::vector<std::string>> outputs;
    for (int threads : {1, 4, 16}) {
        const auto dir = scratch() / fmt::format("c10_t{}", threads);
        const int code = run_cli(fmt::format("verify --config \"{}\" --threads {} --out \"{}\"",
                                             config_path("memory_one_geometric.json").string(), threads, dir.string()));
        o.require(code == 0, fmt::format("verify with {} threads", threads));
        std::vector<std::string> files;
        for (const auto& p : files_with_prefix(dir, "verify_")) files.push_back(slurp(p));
        outputs.push_back(files);
    }
    o.require(outputs[0].size() == 2, "json and csv outputs present");
    o.require(outputs[0] == outputs[1] && outputs[0] == outputs[2], "byte-identical outputs for 1, 4, 16 threads");
    o.note("verify outputs compared across thread counts 1, 4, 16: {}",
           outputs[0] == outputs[1] && outputs[0] == outputs[2] ? "identical" : "different");
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* title;
        Outcome (*fn)();
    };
    const Criterion criteria[] = {
        {1, "coefficient recursion", coefficient_recursion},
        {2, "Young-transform chain", young_chain},
        {3, "Hoeffding/Bennett/Bernstein ordering", hoeffding_ordering},
        {4, "closed-form optimizers", closed_form_optimizers},
        {5, "martingale oracle", martingale_oracle},
        {6, "exact binomial cross-check", exact_binomial},
        {7, "Monte-Carlo bound coverage", coverage},
        {8, "moment bounds", moment_bounds},
        {9, "order-of-magnitude rates", rates},
        {10, "determinism across thread counts", determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.lines.push_back(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!out.pass) ++failures;
        fmt::print("{} {:>2} {} ({:.1f} s)\n", out.pass ? "PASS" : "FAIL", c.id, c.title, secs);
        for (const auto& l : out.lines) fmt::print("       {}\n", l);
        std::fflush(stdout);
    }
    fmt::print("{} of 10 criteria passed\n", 10 - failures);
    fs::remove_all(scratch());
    return failures == 0 ? 0 : 1;
}

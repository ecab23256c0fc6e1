#include "imdev/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "CLI11.hpp"
#include "imdev/bounds.hpp"
#include "imdev/coefficients.hpp"
#include "imdev/config.hpp"
#include "imdev/errors.hpp"
#include "imdev/monte_carlo.hpp"
#include "imdev/oracle.hpp"
#include "imdev/process.hpp"
#include "imdev/serialize.hpp"

namespace imdev::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = IMDEV_VERSION;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    std::string out;
    bool force = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "Config file (JSON)");
    sub->add_option("--seed", c.seed, "Master seed (overrides the config)");
    sub->add_option("--threads", c.threads,
                    "Worker threads; 0 = auto (IMDEV_THREADS, else hardware concurrency)");
    sub->add_option("--out", c.out, "Output directory");
    sub->add_flag("--force", c.force, "Re-run a job already recorded as complete in the manifest");
}

std::string now_utc() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(t));
}

std::string fd(double v) { return format_double(v); }

std::vector<double> broadcast_to(const std::vector<double>& v, std::size_t n) {
    if (v.size() == 1) return std::vector<double>(n, v[0]);
    if (v.size() != n) throw DomainError("constant vector has length " + std::to_string(v.size()) +
                                         ", expected 1 or " + std::to_string(n));
    return v;
}

// ------------------------------------------------------------- manifest

struct OutputFile {
    std::string name;
    std::string content;
};

struct JobResult {
    std::vector<OutputFile> files;
    Json summary = Json::object();
    int exit_code = kExitOk;
};

struct JobKey {
    std::string job;
    std::string digest;
    std::uint64_t seed = 0;
    Json parameters;
};

fs::path manifest_path(const fs::path& dir) { return dir / "run_manifest.json"; }

Json load_manifest(const fs::path& dir) {
    const auto path = manifest_path(dir);
    if (!fs::exists(path)) {
        Json m;
        m["schema_version"] = kSchemaVersion;
        m["tool"] = "imdev";
        m["jobs"] = Json::array();
        return m;
    }
    auto m = read_json_file(path);
    if (!m.is_object() || !m.contains("jobs") || !m["jobs"].is_array())
        throw ConfigError(path.string() + ": not a run manifest");
    return m;
}

bool already_complete(const Json& manifest, const JobKey& key) {
    for (const auto& j : manifest["jobs"]) {
        if (j.value("job", "") == key.job && j.value("config_digest", "") == key.digest &&
            j.value("seed", std::uint64_t{0}) == key.seed && j.value("status", "") == "completed")
            return true;
    }
    return false;
}

// Runs `body`, writes its files into `dir` and appends one manifest entry.
int run_recorded(const fs::path& dir, const JobKey& key, bool force, std::ostream& out,
                 const std::function<JobResult()>& body) {
    auto manifest = load_manifest(dir);
    if (!force && already_complete(manifest, key)) {
        out << fmt::format("{} {} seed {}: already complete in {} (use --force to re-run)\n", key.job, key.digest,
                           key.seed, manifest_path(dir).string());
        return kExitOk;
    }
    Json entry;
    entry["job"] = key.job;
    entry["config_digest"] = key.digest;
    entry["seed"] = key.seed;
    entry["tool_version"] = kVersion;
    entry["started_at"] = now_utc();
    entry["parameters"] = key.parameters;

    auto append = [&](Json e) {
        manifest = load_manifest(dir);
        manifest["jobs"].push_back(std::move(e));
        write_file_atomic(manifest_path(dir), manifest.dump(2) + "\n");
    };

    JobResult result;
    try {
        result = body();
    } catch (const std::exception& ex) {
        entry["finished_at"] = now_utc();
        entry["status"] = "failed";
        entry["error"] = ex.what();
        try {
            append(entry);
        } catch (...) {
        }
        throw;
    }
    Json inventory = Json::array();
    for (const auto& f : result.files) {
        write_file_atomic(dir / f.name, f.content);
        inventory.push_back(Json{{"path", f.name}, {"fnv1a64", hex_digest(fnv1a64(f.content))}});
        out << "wrote " << (dir / f.name).string() << "\n";
    }
    entry["finished_at"] = now_utc();
    entry["status"] = "completed";
    entry["exit_code"] = result.exit_code;
    entry["outputs"] = inventory;
    entry["summary"] = result.summary;
    append(entry);
    return result.exit_code;
}

// Writes files under --out with a manifest entry, or prints them to stdout.
int emit(const Common& c, const JobKey& key, std::ostream& out, const std::function<JobResult()>& body) {
    if (!c.out.empty()) return run_recorded(c.out, key, c.force, out, body);
    const auto r = body();
    for (const auto& f : r.files) out << f.content;
    return r.exit_code;
}

// --------------------------------------------------------------- inputs

ExperimentConfig load_config(const Common& c) {
    if (c.config.empty()) throw ConfigError("--config is required");
    auto cfg = experiment_config_from_json(read_json_file(c.config));
    if (c.seed) cfg.seed = *c.seed;
    if (!c.out.empty()) cfg.out_dir = c.out;
    return cfg;
}

// A bare process spec (with "family") or a full experiment config.
ProcessSpec load_process(const std::string& path) {
    const auto j = read_json_file(path);
    if (j.is_object() && j.contains("family")) return process_spec_from_json(j);
    return experiment_config_from_json(j).process;
}

std::vector<double> split_numbers(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(what + ": cannot parse '" + item + "' as a number");
        }
    }
    return out;
}

// geometric:FIRST,RATIO | list:a1,a2,... | zero
ContractionProfile parse_profile(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (head == "zero") return ContractionProfile(std::vector<double>{});
    if (head == "geometric") {
        const auto v = split_numbers(rest, "--profile");
        if (v.size() != 2) throw ConfigError("--profile geometric needs FIRST,RATIO");
        return ContractionProfile::geometric(v[0], v[1]);
    }
    if (head == "list") return ContractionProfile(split_numbers(rest, "--profile"));
    throw ConfigError("--profile: expected geometric:FIRST,RATIO, list:a1,a2,... or zero");
}

Route route_from_string(const std::string& s) {
    if (s == "G" || s == "g") return Route::g;
    if (s == "H" || s == "h") return Route::h;
    throw ConfigError("route must be G or H");
}

// sqrt of the aggregate variance proxy, used to scale x grids given in sqrt_v units.
double reference_sqrt_v(const ProcessSpec& spec, std::size_t n, std::uint64_t seed, std::size_t threads) {
    const Route route = supports_c2(spec) ? Route::g : Route::h;
    DominatingRequest rq;
    rq.kind = DominatingKind::bernstein;
    rq.route = route;
    rq.threads = threads;
    const auto d = estimate_dominating_constants(spec, n, rq, seed);
    const auto table = table_for(spec, route, n);
    return std::sqrt(aggregate_v(table, broadcast_to(d.V, n)));
}

struct ResolvedBound {
    BoundKind kind;
    Route route;
    DominatingSpec dominating;
    LipschitzTable table;
};

ResolvedBound resolve_bound(const ProcessSpec& spec, std::size_t n, const BoundRequest& b, std::uint64_t seed,
                            std::size_t threads) {
    const Route route = b.estimate.route.value_or(route_for(b.kind));
    if (route == Route::g && !supports_c2(spec))
        throw UnsupportedError("bound " + to_string(b.kind) + " on route G needs the innovation-Lipschitz condition, which " +
                               to_string(spec.family) + " does not satisfy");
    DominatingSpec d;
    if (b.dominating) {
        d = *b.dominating;
    } else {
        DominatingRequest rq = b.estimate;
        rq.kind = required_dominating_kind(b.kind);
        rq.route = route;
        rq.threads = threads;
        d = estimate_dominating_constants(spec, n, rq, seed);
    }
    d.validate(n);
    return {b.kind, route, std::move(d), table_for(spec, route, n)};
}

std::string bound_csv_header() { return "kind,x,value,raw,looser,side,validity,clamped,notes\n"; }

std::string bound_csv_row(const TailBound& b) {
    std::string notes;
    for (std::size_t i = 0; i < b.notes.size(); ++i) notes += (i ? ";" : "") + b.notes[i];
    return csv_join({b.kind, fd(b.x), fd(b.value), fd(b.raw), b.looser ? fd(*b.looser) : "",
                     b.native_two_sided ? "two_sided" : to_string(b.side), b.valid ? "ok" : "out_of_domain",
                     b.clamped ? "1" : "0", notes}) +
           "\n";
}

// --------------------------------------------------------------- coeffs

struct CoeffsArgs {
    std::string profile;
    std::string route = "H";
    std::size_t n = 10;
};

int cmd_coeffs(const Common& c, const CoeffsArgs& a, std::ostream& out) {
    if (a.n == 0) throw DomainError("--n must be >= 1");
    ContractionProfile profile;
    Json params;
    if (!a.profile.empty()) {
        profile = parse_profile(a.profile);
        params["profile"] = a.profile;
    } else if (!c.config.empty()) {
        const auto spec = load_process(c.config);
        const Route r = route_from_string(a.route);
        profile = r == Route::g ? domination_profile(spec).profile : contraction_certificate(spec).profile;
        params["process"] = to_json(spec);
        params["route"] = to_string(r);
    } else {
        throw ConfigError("coeffs needs --profile or --config");
    }
    params["n"] = a.n;
    const JobKey key{"coeffs", hex_digest(fnv1a64(params.dump())), 0, params};
    return emit(c, key, out, [&] {
        const auto t = build_lipschitz_table(profile, a.n);
        std::string csv = fmt::format("# lipschitz table a_k(i), rows k, columns i; digest {}\n", key.digest);
        csv += "k";
        for (std::size_t i = 0; i < a.n; ++i) csv += "," + std::to_string(i);
        csv += "\n";
        for (std::size_t k = 0; k < a.n; ++k) {
            csv += std::to_string(k);
            for (std::size_t i = 0; i < a.n; ++i) csv += "," + (i < k ? std::string() : fd(t.at(k, i)));
            csv += "\n";
        }
        csv += "diagonal";
        for (double d : t.diagonal()) csv += "," + fd(d);
        csv += "\n";
        JobResult r;
        r.files.push_back({fmt::format("coeffs_{}.csv", key.digest), csv});
        r.summary["uniform_bound"] = diagonal_uniform_bound(profile);
        r.summary["max_diagonal"] = *std::max_element(t.diagonal().begin(), t.diagonal().end());
        return r;
    });
}

// ------------------------------------------------------------- simulate

struct SimulateArgs {
    std::size_t n = 0;
    std::size_t replicates = 1;
};

int cmd_simulate(const Common& c, const SimulateArgs& a, std::ostream& out) {
    if (c.config.empty()) throw ConfigError("simulate needs --config");
    const auto j = read_json_file(c.config);
    ProcessSpec spec;
    std::size_t n = 200;
    std::uint64_t seed = 1;
    if (j.is_object() && j.contains("family")) {
        spec = process_spec_from_json(j);
    } else {
        const auto cfg = experiment_config_from_json(j);
        spec = cfg.process;
        n = cfg.n;
        seed = cfg.seed;
    }
    if (a.n) n = a.n;
    if (c.seed) seed = *c.seed;
    if (a.replicates == 0) throw DomainError("--replicates must be >= 1");
    const ProcessModel model(spec);
    Json params{{"process", to_json(spec)}, {"n", n}, {"replicates", a.replicates}};
    const JobKey key{"simulate", hex_digest(fnv1a64(params.dump())), seed, params};
    return emit(c, key, out, [&] {
        std::vector<std::vector<double>> paths(a.replicates, std::vector<double>(n));
        std::vector<double> scratch;
        std::size_t truncations = 0;
        for (std::size_t r = 0; r < a.replicates; ++r) truncations += model.simulate_into(seed, r, paths[r], scratch);
        std::string csv = fmt::format("# trajectory; digest {} seed {} spec {}\n", key.digest, seed,
                                      hex_digest(model.digest()));
        csv += "t";
        for (std::size_t r = 0; r < a.replicates; ++r) csv += ",x" + std::to_string(r);
        csv += "\n";
        for (std::size_t t = 0; t < n; ++t) {
            csv += std::to_string(t + 1);
            for (std::size_t r = 0; r < a.replicates; ++r) csv += "," + fd(paths[r][t]);
            csv += "\n";
        }
        JobResult res;
        res.files.push_back({fmt::format("trajectory_{}_s{}.csv", key.digest, seed), csv});
        res.summary["truncation_events"] = truncations;
        return res;
    });
}

// --------------------------------------------------------------- bounds

struct BoundsArgs {
    std::vector<std::string> kinds;
    std::vector<double> x;
    std::size_t n = 1;
    std::string profile = "zero";
    std::string side = "upper";
    std::string dominating_file;
    double M = 1.0, epsilon = 1.0, t0 = 1.0, alpha = 0.5, C1 = 2.0, max_norm = 1.0;
    double p = 0.0;
    std::vector<double> V{1.0}, K{1.0}, Mk{2.0}, A{1.0};
};

DominatingSpec inline_dominating(const BoundsArgs& a, BoundKind kind) {
    DominatingSpec d;
    d.kind = required_dominating_kind(kind);
    d.M = a.M;
    d.epsilon = a.epsilon;
    d.t0 = a.t0;
    d.alpha = a.alpha;
    d.C1 = a.C1;
    d.max_norm = a.max_norm;
    d.V = a.V;
    d.K = a.K;
    d.Mk = a.Mk;
    d.A = a.A;
    if (a.p > 0.0) {
        d.p = a.p;
    } else {
        d.p = d.kind == DominatingKind::semiexp_g ? 0.5 : 2.0;
    }
    return d;
}

int cmd_bounds(const Common& c, const BoundsArgs& a, std::ostream& out) {
    const Side side = side_from_string(a.side);
    if (!c.config.empty()) {
        const auto cfg = load_config(c);
        const std::size_t threads = resolve_threads(c.threads);
        std::vector<BoundRequest> requests;
        if (a.kinds.empty()) {
            requests = cfg.bounds;
        } else {
            for (const auto& k : a.kinds) {
                const auto kind = bound_kind_from_string(k);
                const auto it = std::find_if(cfg.bounds.begin(), cfg.bounds.end(),
                                             [&](const BoundRequest& b) { return b.kind == kind; });
                BoundRequest b;
                if (it != cfg.bounds.end()) {
                    b = *it;
                } else {
                    b.kind = kind;
                    b.estimate.kind = required_dominating_kind(kind);
                }
                requests.push_back(b);
            }
        }
        if (requests.empty()) throw ConfigError("no bounds requested (use --kind or the config's bounds list)");
        auto params = to_json(cfg);
        params.erase("out_dir");
        params["x"] = a.x;
        params["side"] = a.side;
        Json kinds = Json::array();
        for (const auto& b : requests) kinds.push_back(to_string(b.kind));
        params["kinds"] = kinds;
        const JobKey key{"bounds", hex_digest(fnv1a64(params.dump())), cfg.seed, params};
        return emit(c, key, out, [&] {
            ProcessModel check(cfg.process);
            const auto grid =
                a.x.empty() ? cfg.x_grid.materialize(reference_sqrt_v(cfg.process, cfg.n, cfg.seed, threads)) : a.x;
            JobResult r;
            for (const auto& b : requests) {
                const auto rb = resolve_bound(cfg.process, cfg.n, b, cfg.seed, threads);
                std::string csv = fmt::format("# bound curve {}; route {}; digest {} seed {}\n", to_string(b.kind),
                                              to_string(rb.route), key.digest, cfg.seed);
                csv += bound_csv_header();
                for (double x : grid) {
                    const auto tb = evaluate_bound(b.kind, rb.dominating, rb.table, x, side);
                    if (!tb.valid) r.exit_code = kExitDomain;
                    csv += bound_csv_row(tb);
                }
                r.files.push_back({fmt::format("bounds_{}_{}_s{}.csv", to_string(b.kind), key.digest, cfg.seed), csv});
                r.summary[to_string(b.kind)] = to_json(rb.dominating);
            }
            return r;
        });
    }

    if (a.kinds.empty()) throw ConfigError("bounds needs --kind (or --config)");
    if (a.x.empty()) throw ConfigError("bounds needs --x (or --config)");
    if (a.n == 0) throw DomainError("--n must be >= 1");
    std::optional<DominatingSpec> file_spec;
    if (!a.dominating_file.empty()) file_spec = dominating_from_json(read_json_file(a.dominating_file));
    const auto profile = parse_profile(a.profile);
    Json params{{"kinds", a.kinds}, {"x", a.x}, {"n", a.n}, {"profile", a.profile}, {"side", a.side}};
    std::vector<std::pair<BoundKind, DominatingSpec>> specs;
    for (const auto& k : a.kinds) {
        const auto kind = bound_kind_from_string(k);
        auto d = file_spec ? *file_spec : inline_dominating(a, kind);
        if (d.kind != required_dominating_kind(kind))
            throw ConfigError("bound " + k + " needs " + to_string(required_dominating_kind(kind)) + " constants");
        params["dominating"][k] = to_json(d);
        specs.emplace_back(kind, std::move(d));
    }
    const JobKey key{"bounds", hex_digest(fnv1a64(params.dump())), 0, params};
    return emit(c, key, out, [&] {
        const auto table = build_lipschitz_table(profile, a.n);
        JobResult r;
        std::string csv = fmt::format("# bound values; digest {}\n", key.digest) + bound_csv_header();
        for (const auto& [kind, d] : specs) {
            d.validate(a.n);
            for (double x : a.x) {
                const auto tb = evaluate_bound(kind, d, table, x, side);
                if (!tb.valid) r.exit_code = kExitDomain;
                csv += bound_csv_row(tb);
            }
        }
        r.files.push_back({fmt::format("bounds_{}.csv", key.digest), csv});
        return r;
    });
}

// --------------------------------------------------------------- verify

int cmd_verify(const Common& c, std::ostream& out) {
    const auto cfg = load_config(c);
    if (cfg.bounds.empty()) throw ConfigError("verify: the config lists no bounds");
    const std::string digest = hex_digest(config_digest(cfg));
    auto params = to_json(cfg);
    params.erase("out_dir");
    const JobKey key{"verify", digest, cfg.seed, params};
    const std::size_t threads = resolve_threads(c.threads);
    return run_recorded(cfg.out_dir, key, c.force, out, [&] {
        const ProcessModel model(cfg.process);
        const double sqrt_v = reference_sqrt_v(cfg.process, cfg.n, cfg.seed, threads);
        const auto grid = cfg.x_grid.materialize(sqrt_v);
        const auto tails =
            empirical_tail_pair(cfg.process, cfg.functional, cfg.n, grid, cfg.replicates, cfg.seed, cfg.ci_level, threads);

        Json doc;
        doc["schema_version"] = kSchemaVersion;
        doc["job"] = "verify";
        doc["config_digest"] = digest;
        doc["seed"] = cfg.seed;
        doc["config"] = params;
        doc["x_grid_reference"] = Json{{"sqrt_v", sqrt_v}, {"route", supports_c2(cfg.process) ? "G" : "H"}};
        doc["empirical"] = Json{{"upper", to_json(tails.upper)}, {"two_sided", to_json(tails.two_sided)}};
        Json reports = Json::array();
        std::string csv = fmt::format("# verification; config digest {} seed {}\n", digest, cfg.seed);
        csv += "bound_kind,route,side,x,x_effective,empirical,empirical_lower,empirical_upper,bound,pass,consistent,"
               "bound_valid\n";
        JobResult r;
        for (const auto& b : cfg.bounds) {
            const auto rb = resolve_bound(cfg.process, cfg.n, b, cfg.seed, threads);
            auto rep = compare_bound(tails.upper, tails.two_sided, b.kind, rb.dominating, rb.table,
                                     spec_flags(cfg.process, rb.route));
            rep.route = rb.route;
            for (const auto& ch : rep.checks) {
                csv += csv_join({rep.bound_kind, to_string(rep.route), to_string(rep.side), fd(ch.x),
                                 fd(ch.x_effective), fd(ch.empirical), fd(ch.empirical_lower), fd(ch.empirical_upper),
                                 fd(ch.bound), ch.pass ? "1" : "0", ch.consistent ? "1" : "0",
                                 ch.bound_valid ? "1" : "0"}) +
                       "\n";
            }
            r.summary[rep.bound_kind] = Json{{"coverage", rep.coverage}, {"consistency", rep.consistency}};
            reports.push_back(to_json(rep));
        }
        doc["reports"] = reports;
        const std::string stem = fmt::format("verify_{}_s{}", digest, cfg.seed);
        r.files.push_back({stem + ".json", doc.dump(2) + "\n"});
        r.files.push_back({stem + ".csv", csv});
        return r;
    });
}

// --------------------------------------------------------------- oracle

struct OracleArgs {
    bool paths = false;
};

int cmd_oracle(const Common& c, const OracleArgs& a, std::ostream& out) {
    if (c.config.empty()) throw ConfigError("oracle needs --config (a finite instance)");
    const auto inst = finite_instance_from_json(read_json_file(c.config));
    inst.validate();
    const auto params = to_json(inst);
    const JobKey key{"oracle", hex_digest(fnv1a64(params.dump())), 0, params};
    return emit(c, key, out, [&] {
        auto rep = enumerate_decomposition(inst);
        const auto table = build_lipschitz_table(instance_certificate(inst), inst.horizon());
        verify_increment_domination(inst, table, &rep);
        verify_g_lipschitz(inst, table, &rep);
        constexpr double kTol = 1e-9;
        const bool ok = rep.telescoping_error <= kTol && rep.martingale_error <= kTol &&
                        rep.domination_ratio <= 1.0 + kTol && rep.lipschitz_ratio <= 1.0 + kTol;
        auto doc = to_json(rep, a.paths);
        doc["config_digest"] = key.digest;
        doc["status"] = ok ? "ok" : "violation";
        JobResult r;
        r.exit_code = ok ? kExitOk : kExitDomain;
        r.files.push_back({fmt::format("oracle_{}.json", key.digest), doc.dump(2) + "\n"});
        r.summary["status"] = doc["status"];
        return r;
    });
}

// --------------------------------------------------------------- report

struct ReportArgs {
    std::vector<std::string> files;
    bool detail = false;
};

int cmd_report(const Common& c, const ReportArgs& a, std::ostream& out) {
    std::vector<fs::path> files(a.files.begin(), a.files.end());
    if (files.empty()) {
        const fs::path dir = c.out.empty() ? fs::path("out") : fs::path(c.out);
        if (!fs::is_directory(dir)) throw ConfigError("report: no such directory " + dir.string());
        for (const auto& e : fs::directory_iterator(dir)) {
            const auto name = e.path().filename().string();
            if (name.rfind("verify_", 0) == 0 && e.path().extension() == ".json") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
    }
    if (files.empty()) throw ConfigError("report: no verification reports found");
    for (const auto& f : files) {
        const auto doc = read_json_file(f);
        if (!doc.is_object() || !doc.contains("reports")) throw ConfigError(f.string() + ": not a verify report");
        out << fmt::format("{}\n  config {}  seed {}\n", f.filename().string(), doc.value("config_digest", "?"),
                           doc.value("seed", std::uint64_t{0}));
        out << fmt::format("  {:<22} {:<5} {:<9} {:>6} {:>9} {:>11}  {}\n", "bound", "route", "side", "x", "coverage",
                           "consistency", "flags");
        for (const auto& rj : doc["reports"]) {
            const auto r = verification_report_from_json(rj);
            std::string flags;
            for (std::size_t i = 0; i < r.flags.size(); ++i) flags += (i ? "," : "") + r.flags[i];
            out << fmt::format("  {:<22} {:<5} {:<9} {:>6} {:>9.4f} {:>11.4f}  {}\n", r.bound_kind,
                               to_string(r.route), to_string(r.side), r.checks.size(), r.coverage, r.consistency,
                               flags);
            if (a.detail) {
                for (const auto& ch : r.checks)
                    out << fmt::format("      x={:<12.6g} emp={:<11.4e} upper={:<11.4e} bound={:<11.4e} {}\n", ch.x,
                                       ch.empirical, ch.empirical_upper, ch.bound, ch.pass ? "pass" : "FAIL");
            }
        }
    }
    return kExitOk;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"imdev: deviation bounds for infinite-memory processes", "imdev"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    app.footer(
        "Exit codes: 0 success, 1 domain error, 2 configuration or I/O error.\n"
        "IMDEV_THREADS sets the default worker count when --threads is 0 or absent.");

    Common common;
    CoeffsArgs coeffs;
    SimulateArgs simulate;
    BoundsArgs bounds;
    OracleArgs oracle;
    ReportArgs report;

    auto* s_coeffs = app.add_subcommand("coeffs", "Lipschitz coefficient table as CSV");
    add_common(s_coeffs, common);
    s_coeffs->add_option("--profile", coeffs.profile, "geometric:FIRST,RATIO | list:a1,a2,... | zero");
    s_coeffs->add_option("--n", coeffs.n, "Horizon")->capture_default_str();
    s_coeffs->add_option("--route", coeffs.route, "With --config: G (domination) or H (certificate)")
        ->capture_default_str();

    auto* s_sim = app.add_subcommand("simulate", "Trajectories as CSV");
    add_common(s_sim, common);
    s_sim->add_option("--n", simulate.n, "Horizon (default: from the config)");
    s_sim->add_option("--replicates", simulate.replicates, "Number of trajectories")->capture_default_str();

    auto* s_bounds = app.add_subcommand("bounds", "Bound curves as CSV");
    add_common(s_bounds, common);
    s_bounds->add_option("--kind", bounds.kinds, "Bound kind(s)")->delimiter(',');
    s_bounds->add_option("--x", bounds.x, "Threshold(s) on S_n")->delimiter(',');
    s_bounds->add_option("--n", bounds.n, "Horizon (without --config)")->capture_default_str();
    s_bounds->add_option("--profile", bounds.profile, "Contraction profile (without --config)")
        ->capture_default_str();
    s_bounds->add_option("--side", bounds.side, "upper | lower | two_sided")->capture_default_str();
    s_bounds->add_option("--dominating", bounds.dominating_file, "DominatingSpec JSON");
    s_bounds->add_option("--M", bounds.M, "M")->capture_default_str();
    s_bounds->add_option("--epsilon", bounds.epsilon, "epsilon")->capture_default_str();
    s_bounds->add_option("--t0", bounds.t0, "t0")->capture_default_str();
    s_bounds->add_option("--p", bounds.p, "p (default 2, or 0.5 for semiexp_g)");
    s_bounds->add_option("--alpha", bounds.alpha, "alpha")->capture_default_str();
    s_bounds->add_option("--C1", bounds.C1, "C1")->capture_default_str();
    s_bounds->add_option("--max-norm", bounds.max_norm, "norm of the weighted maximum")->capture_default_str();
    s_bounds->add_option("--V", bounds.V, "V_k (one value or n)")->delimiter(',');
    s_bounds->add_option("--K", bounds.K, "K_k (one value or n)")->delimiter(',');
    s_bounds->add_option("--Mk", bounds.Mk, "M_k (one value or n)")->delimiter(',');
    s_bounds->add_option("--A", bounds.A, "A_k (one value or n)")->delimiter(',');

    auto* s_verify = app.add_subcommand("verify", "Monte-Carlo verification report (JSON + CSV)");
    add_common(s_verify, common);

    auto* s_oracle = app.add_subcommand("oracle", "Exact martingale decomposition of a finite instance");
    add_common(s_oracle, common);
    s_oracle->add_flag("--paths", oracle.paths, "Include per-path arrays");

    auto* s_report = app.add_subcommand("report", "Summary table from stored verification reports");
    add_common(s_report, common);
    s_report->add_option("files", report.files, "Report JSON files (default: verify_*.json under --out)");
    s_report->add_flag("--detail", report.detail, "Per-threshold rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitConfig;
    }

    try {
        if (s_coeffs->parsed()) return cmd_coeffs(common, coeffs, out);
        if (s_sim->parsed()) return cmd_simulate(common, simulate, out);
        if (s_bounds->parsed()) return cmd_bounds(common, bounds, out);
        if (s_verify->parsed()) return cmd_verify(common, out);
        if (s_oracle->parsed()) return cmd_oracle(common, oracle, out);
        if (s_report->parsed()) return cmd_report(common, report, out);
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    err << app.help();
    return kExitConfig;
}

}  // namespace

int run(int argc, char** argv) { return dispatch(argc, argv, std::cout, std::cerr); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"imdev"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace imdev::cli

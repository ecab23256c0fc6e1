#include "imdev/serialize.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include <fmt/format.h>

#include "imdev/errors.hpp"

namespace imdev {

namespace {

// Strict field reader; `done()` rejects anything that was not asked for.
class Obj {
public:
    Obj(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    const Json& at(const std::string& k) {
        seen_.insert(k);
        const auto it = j_.find(k);
        if (it == j_.end()) throw ConfigError(where_ + ": missing field '" + k + "'");
        return *it;
    }

    const Json* opt(const std::string& k) {
        seen_.insert(k);
        const auto it = j_.find(k);
        return (it == j_.end() || it->is_null()) ? nullptr : &*it;
    }

    double num(const std::string& k) { return as_num(at(k), k); }
    double num_or(const std::string& k, double def) {
        const Json* v = opt(k);
        return v ? as_num(*v, k) : def;
    }
    std::uint64_t uint_or(const std::string& k, std::uint64_t def) {
        const Json* v = opt(k);
        if (!v) return def;
        if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0))
            throw ConfigError(where_ + ": field '" + k + "' must be a nonnegative integer");
        return v->get<std::uint64_t>();
    }
    bool bool_or(const std::string& k, bool def) {
        const Json* v = opt(k);
        if (!v) return def;
        if (!v->is_boolean()) throw ConfigError(where_ + ": field '" + k + "' must be a boolean");
        return v->get<bool>();
    }
    std::string str(const std::string& k) { return as_str(at(k), k); }
    std::string str_or(const std::string& k, const std::string& def) {
        const Json* v = opt(k);
        return v ? as_str(*v, k) : def;
    }
    std::vector<double> nums_or(const std::string& k) {
        const Json* v = opt(k);
        std::vector<double> out;
        if (!v) return out;
        if (!v->is_array()) throw ConfigError(where_ + ": field '" + k + "' must be an array");
        for (const auto& e : *v) out.push_back(as_num(e, k));
        return out;
    }
    std::vector<std::string> strs_or(const std::string& k) {
        const Json* v = opt(k);
        std::vector<std::string> out;
        if (!v) return out;
        if (!v->is_array()) throw ConfigError(where_ + ": field '" + k + "' must be an array");
        for (const auto& e : *v) out.push_back(as_str(e, k));
        return out;
    }

    void schema() {
        const Json* v = opt("schema_version");
        if (v && (!v->is_number_integer() || v->get<int>() != kSchemaVersion))
            throw ConfigError(where_ + ": unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    }

    void done() const {
        for (const auto& [k, v] : j_.items()) {
            (void)v;
            if (!seen_.count(k)) throw ConfigError(where_ + ": unknown field '" + k + "'");
        }
    }

    const std::string& where() const { return where_; }

private:
    double as_num(const Json& v, const std::string& k) const {
        if (!v.is_number()) throw ConfigError(where_ + ": field '" + k + "' must be a number");
        return v.get<double>();
    }
    std::string as_str(const Json& v, const std::string& k) const {
        if (!v.is_string()) throw ConfigError(where_ + ": field '" + k + "' must be a string");
        return v.get<std::string>();
    }

    const Json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

Json provenance_json(const Provenance& p) {
    Json j;
    j["source"] = p.source == Provenance::Source::analytic ? "analytic" : "mc_upper_ci";
    if (p.source == Provenance::Source::mc_upper_ci) {
        j["level"] = p.level;
        j["samples"] = p.samples;
    }
    return j;
}

Provenance provenance_from_json(const Json& j) {
    Obj o(j, "provenance");
    Provenance p;
    const auto src = o.str("source");
    if (src == "analytic") {
        p.source = Provenance::Source::analytic;
    } else if (src == "mc_upper_ci") {
        p.source = Provenance::Source::mc_upper_ci;
    } else {
        throw ConfigError("provenance: unknown source '" + src + "'");
    }
    p.level = o.num_or("level", 0.0);
    p.samples = o.uint_or("samples", 0);
    o.done();
    return p;
}

Json json_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string spacing_name(XGridSpec::Spacing s) { return s == XGridSpec::Spacing::log ? "log" : "linear"; }
std::string units_name(XGridSpec::Units u) { return u == XGridSpec::Units::sqrt_v ? "sqrt_v" : "absolute"; }

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex_digest(std::uint64_t d) { return fmt::format("{:016x}", d); }

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

// ------------------------------------------------------------ innovation

Json to_json(const InnovationLaw& law) {
    Json j;
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
                j["kind"] = "gaussian";
                j["mean"] = k.mean;
                j["std"] = k.std;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                j["kind"] = "uniform";
                j["lo"] = k.lo;
                j["hi"] = k.hi;
            } else if constexpr (std::is_same_v<T, Rademacher>) {
                j["kind"] = "rademacher";
            } else if constexpr (std::is_same_v<T, TwoPoint>) {
                j["kind"] = "two_point";
                j["p"] = k.p;
                j["value_a"] = k.value_a;
                j["value_b"] = k.value_b;
            } else {
                j["kind"] = "laplace";
                j["scale"] = k.scale;
            }
        },
        law.kind());
    return j;
}

InnovationLaw innovation_from_json(const Json& j) {
    Obj o(j, "innovation");
    const auto kind = o.str("kind");
    InnovationLaw::Kind k;
    if (kind == "gaussian") {
        k = Gaussian{o.num_or("mean", 0.0), o.num_or("std", 1.0)};
    } else if (kind == "uniform") {
        k = Uniform{o.num_or("lo", -1.0), o.num_or("hi", 1.0)};
    } else if (kind == "rademacher") {
        k = Rademacher{};
    } else if (kind == "two_point") {
        k = TwoPoint{o.num_or("p", 0.5), o.num_or("value_a", 1.0), o.num_or("value_b", -1.0)};
    } else if (kind == "laplace") {
        k = Laplace{o.num_or("scale", 1.0)};
    } else {
        throw ConfigError("innovation: unknown kind '" + kind + "'");
    }
    o.done();
    try {
        return InnovationLaw(k);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

Json to_json(const LagLaw& law) {
    Json j;
    j["pmf"] = law.pmf();
    j["truncated_mass"] = law.truncated_mass();
    return j;
}

LagLaw lag_law_from_json(const Json& j) {
    Obj o(j, "lag_law");
    try {
        if (const Json* kind = o.opt("kind")) {
            if (!kind->is_string()) throw ConfigError("lag_law: kind must be a string");
            const auto k = kind->get<std::string>();
            LagLaw law;
            if (k == "degenerate") {
                law = LagLaw::degenerate(o.uint_or("lag", 1));
            } else if (k == "uniform") {
                law = LagLaw::uniform(o.uint_or("max_lag", 1));
            } else if (k == "geometric") {
                law = LagLaw::geometric(o.num("q"));
            } else {
                throw ConfigError("lag_law: unknown kind '" + k + "'");
            }
            o.done();
            return law;
        }
        auto pmf = o.nums_or("pmf");
        const double trunc = o.num_or("truncated_mass", 0.0);
        o.done();
        return LagLaw(std::move(pmf), trunc);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

// --------------------------------------------------------------- process

Json to_json(const ProcessSpec& s) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["family"] = to_string(s.family);
    Json c;
    c["values"] = s.coefficients.values;
    if (s.coefficients.tail) {
        c["tail"] = Json{{"first", s.coefficients.tail->first}, {"ratio", s.coefficients.tail->ratio}};
    } else {
        c["tail"] = nullptr;
    }
    j["coefficients"] = c;
    j["lag_law"] = to_json(s.lag_law);
    j["response"] = Json{{"kind", to_string(s.response.kind)}, {"scale", s.response.scale}};
    j["arch_floor"] = s.arch_floor;
    j["erw"] = Json{{"t", s.erw.t}, {"p", s.erw.p}};
    j["innovation"] = to_json(s.innovation);
    Json ip;
    switch (s.initial_past.kind) {
        case InitialPast::Kind::zeros: ip["kind"] = "zeros"; break;
        case InitialPast::Kind::constant: ip["kind"] = "constant"; break;
        case InitialPast::Kind::burn_in: ip["kind"] = "burn_in"; break;
    }
    ip["value"] = s.initial_past.value;
    ip["steps"] = s.initial_past.steps;
    j["initial_past"] = ip;
    j["memory_truncation"] = s.memory_truncation;
    return j;
}

ProcessSpec process_spec_from_json(const Json& j) {
    Obj o(j, "process");
    o.schema();
    ProcessSpec s;
    try {
        s.family = family_from_string(o.str("family"));
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (const Json* c = o.opt("coefficients")) {
        Obj co(*c, "process.coefficients");
        s.coefficients.values = co.nums_or("values");
        if (const Json* t = co.opt("tail")) {
            Obj to(*t, "process.coefficients.tail");
            s.coefficients.tail = GeometricTail{to.num("first"), to.num("ratio")};
            to.done();
        }
        co.done();
    }
    if (const Json* l = o.opt("lag_law")) s.lag_law = lag_law_from_json(*l);
    if (const Json* r = o.opt("response")) {
        Obj ro(*r, "process.response");
        try {
            s.response.kind = response_from_string(ro.str_or("kind", "identity"));
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
        s.response.scale = ro.num_or("scale", 1.0);
        ro.done();
    }
    s.arch_floor = o.num_or("arch_floor", 1.0);
    if (const Json* e = o.opt("erw")) {
        Obj eo(*e, "process.erw");
        s.erw.t = eo.num_or("t", 0.5);
        s.erw.p = eo.num_or("p", 0.5);
        eo.done();
    }
    if (const Json* in = o.opt("innovation")) s.innovation = innovation_from_json(*in);
    if (const Json* ip = o.opt("initial_past")) {
        Obj io(*ip, "process.initial_past");
        const auto k = io.str_or("kind", "zeros");
        if (k == "zeros") {
            s.initial_past.kind = InitialPast::Kind::zeros;
        } else if (k == "constant") {
            s.initial_past.kind = InitialPast::Kind::constant;
        } else if (k == "burn_in") {
            s.initial_past.kind = InitialPast::Kind::burn_in;
        } else {
            throw ConfigError("process.initial_past: unknown kind '" + k + "'");
        }
        s.initial_past.value = io.num_or("value", 0.0);
        s.initial_past.steps = io.uint_or("steps", 0);
        io.done();
    }
    s.memory_truncation = o.uint_or("memory_truncation", 0);
    o.done();
    return s;
}

std::uint64_t spec_digest(const ProcessSpec& spec) { return fnv1a64(to_json(spec).dump()); }

// ------------------------------------------------------------ functional

Json to_json(const FunctionalSpec& f) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = to_string(f.kind());
    j["clip"] = f.clip();
    return j;
}

FunctionalSpec functional_from_json(const Json& j) {
    Obj o(j, "functional");
    o.schema();
    FunctionalSpec::Kind k;
    try {
        k = functional_kind_from_string(o.str("kind"));
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    const double clip = o.num_or("clip", 1.0);
    o.done();
    try {
        return FunctionalSpec(k, clip);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

// ------------------------------------------------------------ dominating

Json to_json(const DominatingSpec& d) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = to_string(d.kind);
    j["M"] = d.M;
    j["epsilon"] = d.epsilon;
    j["t0"] = d.t0;
    j["p"] = d.p;
    j["alpha"] = d.alpha;
    j["C1"] = d.C1;
    j["max_norm"] = d.max_norm;
    j["V"] = d.V;
    j["K"] = d.K;
    j["Mk"] = d.Mk;
    j["A"] = d.A;
    Json prov = Json::object();
    for (const auto& [k, p] : d.provenance) prov[k] = provenance_json(p);
    j["provenance"] = prov;
    j["flags"] = d.flags;
    return j;
}

DominatingSpec dominating_from_json(const Json& j) {
    Obj o(j, "dominating");
    o.schema();
    DominatingSpec d;
    d.kind = dominating_kind_from_string(o.str("kind"));
    d.M = o.num_or("M", 0.0);
    d.epsilon = o.num_or("epsilon", 0.0);
    d.t0 = o.num_or("t0", 0.0);
    d.p = o.num_or("p", 0.0);
    d.alpha = o.num_or("alpha", 0.0);
    d.C1 = o.num_or("C1", 0.0);
    d.max_norm = o.num_or("max_norm", 0.0);
    d.V = o.nums_or("V");
    d.K = o.nums_or("K");
    d.Mk = o.nums_or("Mk");
    d.A = o.nums_or("A");
    if (const Json* p = o.opt("provenance")) {
        if (!p->is_object()) throw ConfigError("dominating.provenance must be an object");
        for (const auto& [k, v] : p->items()) d.provenance[k] = provenance_from_json(v);
    }
    d.flags = o.strs_or("flags");
    o.done();
    return d;
}

// --------------------------------------------------------------- reports

Json to_json(const TailBound& b) {
    Json j;
    j["kind"] = b.kind;
    j["x"] = b.x;
    j["value"] = b.value;
    j["raw"] = json_or_null(b.raw);
    j["looser"] = b.looser ? json_or_null(*b.looser) : Json(nullptr);
    j["side"] = to_string(b.side);
    j["native_two_sided"] = b.native_two_sided;
    Json agg = Json::object();
    for (const auto& [k, v] : b.aggregates) agg[k] = json_or_null(v);
    j["aggregates"] = agg;
    j["validity"] = b.valid ? "ok" : "out_of_domain";
    if (!b.valid) j["reason"] = b.reason;
    j["clamped"] = b.clamped;
    j["notes"] = b.notes;
    return j;
}

Json to_json(const EmpiricalEstimate& e) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["side"] = to_string(e.side);
    j["x_grid"] = e.x_grid;
    j["tail_freq"] = e.tail_freq;
    j["lower_ci"] = e.lower_ci;
    j["upper_ci"] = e.upper_ci;
    j["counts"] = e.counts;
    j["ci_level"] = e.ci_level;
    j["replicates"] = e.replicates;
    j["pilot_replicates"] = e.pilot_replicates;
    j["center"] = e.center;
    j["center_se"] = e.center_se;
    j["seed"] = e.seed;
    j["spec_digest"] = hex_digest(e.spec_digest);
    j["truncation_events"] = e.truncation_events;
    return j;
}

Json to_json(const VerificationReport& r) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["bound_kind"] = r.bound_kind;
    j["route"] = to_string(r.route);
    j["side"] = to_string(r.side);
    j["coverage"] = r.coverage;
    j["consistency"] = r.consistency;
    j["spec_digest"] = hex_digest(r.spec_digest);
    j["seed"] = r.seed;
    j["replicates"] = r.replicates;
    j["ci_level"] = r.ci_level;
    Json agg = Json::object();
    for (const auto& [k, v] : r.aggregates) agg[k] = json_or_null(v);
    j["aggregates"] = agg;
    j["flags"] = r.flags;
    j["dominating"] = to_json(r.dominating);
    Json checks = Json::array();
    for (const auto& c : r.checks) {
        checks.push_back(Json{{"x", c.x},
                              {"x_effective", c.x_effective},
                              {"empirical", c.empirical},
                              {"empirical_lower", c.empirical_lower},
                              {"empirical_upper", c.empirical_upper},
                              {"bound", c.bound},
                              {"pass", c.pass},
                              {"consistent", c.consistent},
                              {"bound_valid", c.bound_valid}});
    }
    j["checks"] = checks;
    return j;
}

VerificationReport verification_report_from_json(const Json& j) {
    Obj o(j, "verification report");
    o.schema();
    VerificationReport r;
    r.bound_kind = o.str("bound_kind");
    const auto route = o.str_or("route", "G");
    if (route != "G" && route != "H") throw ConfigError("verification report: route must be G or H");
    r.route = route == "G" ? Route::g : Route::h;
    r.side = side_from_string(o.str_or("side", "upper"));
    r.coverage = o.num("coverage");
    r.consistency = o.num_or("consistency", 0.0);
    const auto digest = o.str_or("spec_digest", "0");
    try {
        r.spec_digest = std::stoull(digest, nullptr, 16);
    } catch (const std::exception&) {
        throw ConfigError("verification report: bad spec_digest");
    }
    r.seed = o.uint_or("seed", 0);
    r.replicates = o.uint_or("replicates", 0);
    r.ci_level = o.num_or("ci_level", 0.999);
    if (const Json* agg = o.opt("aggregates")) {
        if (!agg->is_object()) throw ConfigError("verification report: aggregates must be an object");
        for (const auto& [k, v] : agg->items())
            r.aggregates[k] = v.is_number() ? v.get<double>() : std::numeric_limits<double>::quiet_NaN();
    }
    r.flags = o.strs_or("flags");
    if (const Json* d = o.opt("dominating")) r.dominating = dominating_from_json(*d);
    if (const Json* cs = o.opt("checks")) {
        if (!cs->is_array()) throw ConfigError("verification report: checks must be an array");
        for (const auto& cj : *cs) {
            Obj c(cj, "verification report.checks");
            ThresholdCheck t;
            t.x = c.num("x");
            t.x_effective = c.num_or("x_effective", t.x);
            t.empirical = c.num("empirical");
            t.empirical_lower = c.num_or("empirical_lower", 0.0);
            t.empirical_upper = c.num("empirical_upper");
            t.bound = c.num("bound");
            t.pass = c.bool_or("pass", false);
            t.consistent = c.bool_or("consistent", false);
            t.bound_valid = c.bool_or("bound_valid", true);
            c.done();
            r.checks.push_back(t);
        }
    }
    o.done();
    return r;
}

Json to_json(const DecompositionReport& r, bool include_paths) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["horizon"] = r.horizon;
    j["paths"] = r.paths;
    j["mean_f"] = r.mean_f;
    j["telescoping_error"] = r.telescoping_error;
    j["martingale_error"] = r.martingale_error;
    j["domination_ratio"] = json_or_null(r.domination_ratio);
    j["domination_route"] = r.domination_used_g ? "G" : "H";
    j["lipschitz_ratio"] = json_or_null(r.lipschitz_ratio);
    if (include_paths) {
        j["path_prob"] = r.path_prob;
        j["x"] = r.x;
        j["g"] = r.g;
        j["d"] = r.d;
    }
    return j;
}

// ------------------------------------------------------- finite instance

Json to_json(const FiniteInstance& inst) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["map"] = to_json(inst.map);
    Json al = Json::array();
    for (const auto& a : inst.alphabets) {
        Json row = Json::array();
        for (const auto& l : a)
            row.push_back(Json{{"lag", l.draw.lag}, {"gamma", l.draw.gamma}, {"value", l.draw.value}, {"prob", l.prob}});
        al.push_back(row);
    }
    j["alphabets"] = al;
    j["initial_past"] = inst.initial_past;
    j["functional"] = to_json(inst.functional);
    return j;
}

FiniteInstance finite_instance_from_json(const Json& j) {
    Obj o(j, "finite instance");
    o.schema();
    FiniteInstance inst;
    inst.map = process_spec_from_json(o.at("map"));
    const Json& al = o.at("alphabets");
    if (!al.is_array()) throw ConfigError("finite instance: alphabets must be an array");
    for (const auto& row : al) {
        if (!row.is_array()) throw ConfigError("finite instance: each alphabet must be an array");
        std::vector<Letter> letters;
        for (const auto& lj : row) {
            Obj lo(lj, "finite instance.letter");
            Letter l;
            l.draw.lag = lo.uint_or("lag", 1);
            l.draw.gamma = static_cast<int>(lo.num_or("gamma", 0.0));
            l.draw.value = lo.num("value");
            l.prob = lo.num("prob");
            lo.done();
            letters.push_back(l);
        }
        inst.alphabets.push_back(std::move(letters));
    }
    inst.initial_past = o.nums_or("initial_past");
    if (const Json* f = o.opt("functional")) inst.functional = functional_from_json(*f);
    o.done();
    return inst;
}

// ---------------------------------------------------------------- config

std::vector<double> XGridSpec::materialize(double sqrt_v) const {
    const double scale = units == Units::sqrt_v ? sqrt_v : 1.0;
    std::vector<double> out;
    if (!values.empty()) {
        for (double v : values) out.push_back(v * scale);
    } else {
        if (count == 0) throw ConfigError("x_grid: count must be >= 1");
        if (!(lo > 0.0) || !(hi >= lo)) throw ConfigError("x_grid: need 0 < lo <= hi");
        for (std::size_t i = 0; i < count; ++i) {
            const double u = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
            const double v = spacing == Spacing::log ? lo * std::pow(hi / lo, u) : lo + u * (hi - lo);
            out.push_back(v * scale);
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(out[i] > 0.0) || !std::isfinite(out[i])) throw ConfigError("x_grid: thresholds must be positive");
        if (i > 0 && out[i] < out[i - 1]) throw ConfigError("x_grid: thresholds must be sorted ascending");
    }
    return out;
}

Json to_json(const XGridSpec& g) {
    Json j;
    if (!g.values.empty()) {
        j["values"] = g.values;
    } else {
        j["count"] = g.count;
        j["lo"] = g.lo;
        j["hi"] = g.hi;
        j["spacing"] = spacing_name(g.spacing);
    }
    j["units"] = units_name(g.units);
    return j;
}

XGridSpec x_grid_from_json(const Json& j) {
    Obj o(j, "x_grid");
    XGridSpec g;
    g.values = o.nums_or("values");
    g.count = o.uint_or("count", g.count);
    g.lo = o.num_or("lo", g.lo);
    g.hi = o.num_or("hi", g.hi);
    const auto sp = o.str_or("spacing", "linear");
    if (sp == "linear") {
        g.spacing = XGridSpec::Spacing::linear;
    } else if (sp == "log") {
        g.spacing = XGridSpec::Spacing::log;
    } else {
        throw ConfigError("x_grid: spacing must be linear or log");
    }
    const auto un = o.str_or("units", "sqrt_v");
    if (un == "sqrt_v") {
        g.units = XGridSpec::Units::sqrt_v;
    } else if (un == "absolute") {
        g.units = XGridSpec::Units::absolute;
    } else {
        throw ConfigError("x_grid: units must be sqrt_v or absolute");
    }
    o.done();
    return g;
}

Json to_json(const DominatingRequest& r) {
    Json j;
    j["route"] = r.route ? Json(to_string(*r.route)) : Json(nullptr);
    j["t0"] = r.t0;
    j["p"] = r.p;
    j["alpha"] = r.alpha;
    j["samples"] = r.samples;
    j["ci_level"] = r.ci_level;
    return j;
}

DominatingRequest dominating_request_from_json(const Json& j) {
    Obj o(j, "estimate");
    DominatingRequest r;
    if (const Json* route = o.opt("route")) {
        if (!route->is_string() || (*route != "G" && *route != "H"))
            throw ConfigError("estimate: route must be \"G\" or \"H\"");
        r.route = *route == "G" ? Route::g : Route::h;
    }
    r.t0 = o.num_or("t0", r.t0);
    r.p = o.num_or("p", r.p);
    r.alpha = o.num_or("alpha", r.alpha);
    r.samples = o.uint_or("samples", r.samples);
    r.ci_level = o.num_or("ci_level", r.ci_level);
    o.done();
    return r;
}

Json to_json(const ExperimentConfig& c) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["process"] = to_json(c.process);
    j["functional"] = to_json(c.functional);
    j["n"] = c.n;
    j["replicates"] = c.replicates;
    j["seed"] = c.seed;
    j["x_grid"] = to_json(c.x_grid);
    Json bounds = Json::array();
    for (const auto& b : c.bounds) {
        Json bj;
        bj["kind"] = to_string(b.kind);
        if (b.dominating) {
            bj["dominating"] = to_json(*b.dominating);
        } else {
            bj["estimate"] = to_json(b.estimate);
        }
        bounds.push_back(bj);
    }
    j["bounds"] = bounds;
    j["out_dir"] = c.out_dir;
    j["ci_level"] = c.ci_level;
    return j;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
    Obj o(j, "config");
    o.schema();
    ExperimentConfig c;
    c.process = process_spec_from_json(o.at("process"));
    if (const Json* f = o.opt("functional")) c.functional = functional_from_json(*f);
    c.n = o.uint_or("n", c.n);
    if (c.n == 0) throw ConfigError("config: n must be >= 1");
    c.replicates = o.uint_or("replicates", c.replicates);
    c.seed = o.uint_or("seed", c.seed);
    if (const Json* g = o.opt("x_grid")) c.x_grid = x_grid_from_json(*g);
    if (const Json* bs = o.opt("bounds")) {
        if (!bs->is_array()) throw ConfigError("config: bounds must be an array");
        for (const auto& bj : *bs) {
            Obj bo(bj, "config.bounds");
            BoundRequest b;
            b.kind = bound_kind_from_string(bo.str("kind"));
            const Json* dom = bo.opt("dominating");
            const Json* est = bo.opt("estimate");
            if (dom && est) throw ConfigError("config.bounds: give either dominating or estimate, not both");
            if (dom) {
                b.dominating = dominating_from_json(*dom);
                if (b.dominating->kind != required_dominating_kind(b.kind))
                    throw ConfigError("config.bounds: " + to_string(b.kind) + " needs " +
                                      to_string(required_dominating_kind(b.kind)) + " constants");
            }
            if (est) b.estimate = dominating_request_from_json(*est);
            b.estimate.kind = required_dominating_kind(b.kind);
            bo.done();
            c.bounds.push_back(std::move(b));
        }
    }
    c.out_dir = o.str_or("out_dir", c.out_dir);
    c.ci_level = o.num_or("ci_level", c.ci_level);
    if (!(c.ci_level > 0.0 && c.ci_level < 1.0)) throw ConfigError("config: ci_level must lie in (0, 1)");
    o.done();
    return c;
}

// The output directory is where results go, not what they are.
std::uint64_t config_digest(const ExperimentConfig& config) {
    auto j = to_json(config);
    j.erase("out_dir");
    return fnv1a64(j.dump());
}

// -------------------------------------------------------------------- io

Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(origin + ": invalid JSON (" + e.what() + ")");
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json_file(const std::filesystem::path& path) { return parse_json_text(read_text_file(path), path.string()); }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw ConfigError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("cannot move output into place at " + path.string());
    }
}

std::string csv_join(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        const auto& c = cells[i];
        if (c.find_first_of(",\"\n\r") == std::string::npos) {
            out += c;
            continue;
        }
        out += '"';
        for (char ch : c) {
            if (ch == '"') out += '"';
            out += ch;
        }
        out += '"';
    }
    return out;
}

}  // namespace imdev

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "imdev/serialize.hpp"

namespace fs = std::filesystem;
using imdev::Json;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

fs::path work_dir() {
    static const fs::path d = [] {
        auto p = fs::temp_directory_path() / ("imdev_cli_" + std::to_string(::getpid()));
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

Result run(const std::string& args) {
    const auto log = work_dir() / "last_output.txt";
    const std::string cmd = std::string("\"") + IMDEV_BIN + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(log);
    return r;
}

fs::path write_config(const std::string& name, std::size_t replicates, std::size_t n) {
    const auto p = work_dir() / name;
    std::ofstream(p) << R"({
  "schema_version": 1,
  "process": {
    "family": "memory_one_infinite",
    "coefficients": {"values": [], "tail": {"first": 0.25, "ratio": 0.5}},
    "lag_law": {"kind": "geometric", "q": 0.5},
    "innovation": {"kind": "rademacher"}
  },
  "functional": {"kind": "sum"},
  "n": )" << n << R"(,
  "replicates": )" << replicates << R"(,
  "seed": 3,
  "x_grid": {"count": 5, "lo": 0.5, "hi": 3.0},
  "bounds": [
    {"kind": "bernstein", "estimate": {"samples": 4000}},
    {"kind": "hoeffding", "estimate": {}},
    {"kind": "vbe", "estimate": {"p": 1.5, "samples": 500}}
  ]
})";
    return p;
}

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(run("--help").code == 0);
    CHECK(run("verify --help").out.find("--threads") != std::string::npos);
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("coeffs --n notanumber").code == 2);
}

TEST_CASE("exit codes distinguish config and domain errors") {
    CHECK(run("verify --config /nonexistent/cfg.json").code == 2);
    const auto bad = work_dir() / "bad.json";
    std::ofstream(bad) << R"({"schema_version": 1, "surprise": true})";
    CHECK(run("verify --config \"" + bad.string() + "\"").code == 2);
    // contraction violated: sum a_i >= 1
    CHECK(run("coeffs --profile list:0.6,0.5 --n 5").code == 1);
    CHECK(run("bounds --kind mcdiarmid --x 100 --n 3").code == 1);
    CHECK(run("bounds --kind semiexp_g --x 1 --K 0.5").code == 1);
}

TEST_CASE("coeffs prints the table with its diagonal") {
    const auto r = run("coeffs --profile geometric:0.5,0.25 --n 4");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("k,0,1,2,3") != std::string::npos);
    // a_1 = 0.5, a_2 = 0.125: a_1(1) = 1.5, a_2(2) = a_1(2) + a_1(1) a_1 = 1.125 + 0.75
    CHECK(r.out.find("diagonal,1,1.5,1.875") != std::string::npos);
}

TEST_CASE("bounds at zero threshold are trivial") {
    const auto r = run("bounds --kind hoeffding,bernstein --x 0,1 --n 4");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("kind,x,value,raw,looser,side,validity,clamped,notes") != std::string::npos);
    CHECK(r.out.find("hoeffding,0,1,") != std::string::npos);
    CHECK(r.out.find("bernstein,0,1,") != std::string::npos);
}

TEST_CASE("oracle on the bundled instance") {
    const auto inst = work_dir() / "inst.json";
    std::ofstream(inst) << R"({
  "schema_version": 1,
  "map": {"family": "mean_field_memory", "coefficients": {"values": [0.5, 0.2]},
          "response": {"kind": "tanh_scaled", "scale": 1.0}},
  "alphabets": [[{"value": 1, "prob": 0.5}, {"value": -1, "prob": 0.5}],
                [{"value": 0, "prob": 0.2}, {"value": 2, "prob": 0.8}],
                [{"value": 1, "prob": 0.5}, {"value": -1, "prob": 0.5}]],
  "initial_past": [0.3, -0.1]
})";
    const auto r = run("oracle --config \"" + inst.string() + "\"");
    REQUIRE(r.code == 0);
    const auto j = Json::parse(r.out);
    CHECK(j.at("status") == "ok");
    CHECK(j.at("telescoping_error").get<double>() < 1e-12);
}

TEST_CASE("verify is reproducible and recorded once") {
    const auto cfg = write_config("small.json", 4000, 30);
    const auto out1 = work_dir() / "v1";
    const auto out2 = work_dir() / "v2";
    REQUIRE(run("verify --config \"" + cfg.string() + "\" --threads 1 --out \"" + out1.string() + "\"").code == 0);
    REQUIRE(run("verify --config \"" + cfg.string() + "\" --threads 3 --out \"" + out2.string() + "\"").code == 0);

    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(out1)) {
        const auto name = e.path().filename().string();
        if (name.rfind("verify_", 0) != 0) continue;
        CHECK(slurp(e.path()) == slurp(out2 / name));
        ++compared;
    }
    CHECK(compared == 2);

    const auto manifest = out1 / "run_manifest.json";
    const auto before = slurp(manifest);
    CHECK(Json::parse(before).at("jobs").size() == 1);

    const auto again = run("verify --config \"" + cfg.string() + "\" --out \"" + out1.string() + "\"");
    CHECK(again.code == 0);
    CHECK(again.out.find("already complete") != std::string::npos);
    CHECK(slurp(manifest) == before);

    const auto forced = run("verify --config \"" + cfg.string() + "\" --force --out \"" + out1.string() + "\"");
    CHECK(forced.code == 0);
    const auto after = slurp(manifest);
    const auto jobs = Json::parse(after).at("jobs");
    CHECK(jobs.size() == 2);
    // append-only: earlier entries are untouched
    CHECK(jobs[0] == Json::parse(before).at("jobs")[0]);

    const auto other_seed = run("verify --config \"" + cfg.string() + "\" --seed 9 --out \"" + out1.string() + "\"");
    CHECK(other_seed.code == 0);
    CHECK(Json::parse(slurp(manifest)).at("jobs").size() == 3);

    const auto rep = run("report --out \"" + out1.string() + "\"");
    CHECK(rep.code == 0);
    CHECK(rep.out.find("bernstein") != std::string::npos);
    CHECK(rep.out.find("vbe") != std::string::npos);
}

TEST_CASE("simulate writes trajectories") {
    const auto cfg = write_config("sim.json", 1000, 12);
    const auto out = work_dir() / "sim";
    const auto r = run("simulate --config \"" + cfg.string() + "\" --replicates 3 --out \"" + out.string() + "\"");
    REQUIRE(r.code == 0);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(out))
        if (e.path().filename().string().rfind("trajectory_", 0) == 0) {
            ++files;
            const auto text = slurp(e.path());
            CHECK(text.find("\nt,x0,x1,x2\n") != std::string::npos);
            // comment, header, 12 rows
            CHECK(std::count(text.begin(), text.end(), '\n') == 14);
        }
    CHECK(files == 1);
}

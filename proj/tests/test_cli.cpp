#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "lorenz/cli.hpp"
#include "lorenz/config.hpp"

namespace fs = std::filesystem;
using namespace lorenz;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "lorenzkit");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("lorenzkit_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path write_file(const fs::path& p, const std::string& body) {
    std::ofstream(p) << body;
    return p;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("empty file gives defaults") {
    const fs::path d = scratch_dir("cfg_empty");
    const RunConfig c = load_config(write_file(d / "c.cfg", "# nothing\n\n"));
    CHECK(c.sigma == 10.0);
    CHECK(c.b == 8.0 / 3.0);
    CHECK(!c.t_max);
}

TEST_CASE("values, comments and errors") {
    const fs::path d = scratch_dir("cfg_vals");
    const RunConfig c = load_config(write_file(d / "c.cfg", "sigma = 16  # raised\nt_max=50\nseed = 9\n"));
    CHECK(c.sigma == 16.0);
    CHECK(*c.t_max == 50.0);
    CHECK(c.seed == 9);

    try {
        load_config(write_file(d / "bad_key.cfg", "sigma = 10\nrho = 28\n"));
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("rho") != std::string::npos);
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    try {
        load_config(write_file(d / "bad_value.cfg", "\n\nb = eight\n"));
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config(d / "missing.cfg"), ValidationError);
    CHECK_THROWS_AS(load_config(write_file(d / "no_eq.cfg", "sigma 10\n")), ValidationError);
}

TEST_CASE("domain checks") {
    const fs::path d = scratch_dir("cfg_domain");
    const RunConfig c = load_config(write_file(d / "c.cfg", "t_max = -5\n"));
    CHECK_THROWS_AS(c.validate(), ValidationError);
    RunConfig r;
    r.lyap_renorm = 5.0;
    CHECK_THROWS_AS(r.validate(), ValidationError);
}

TEST_CASE("config text round trip") {
    RunConfig c;
    c.sigma = 11.25;
    c.t_max = 123.0;
    c.seed = 42;
    c.out = "dir";
    const fs::path d = scratch_dir("cfg_round");
    const RunConfig back = load_config(write_file(d / "c.cfg", to_config_text(c)));
    CHECK(to_json(back) == to_json(c));
}

}

TEST_SUITE("cli") {

TEST_CASE("equilibria at r = 28") {
    const fs::path d = scratch_dir("eq");
    const Run r = run({"equilibria", "--r", "28", "--out", d.string()});
    CHECK(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j["equilibria"].size() == 3);
    CHECK(fs::exists(d / "equilibria.json"));
    const Json m = Json::parse(slurp(d / "manifest.json"));
    CHECK(m["version"] == cli::kVersion);
    CHECK(m["config"]["sigma"] == 10.0);
    CHECK(m["wall_time_s"].contains("equilibria"));
    for (const auto& f : m["files"]) CHECK(fs::exists(d / f["path"].get<std::string>()));
    const RunConfig eff = load_config(d / "effective_config.txt");
    CHECK(eff.sigma == 10.0);
}

TEST_CASE("validation failures exit 2 without a manifest") {
    const fs::path d = scratch_dir("bad_sigma");
    const Run r = run({"equilibria", "--r", "28", "--sigma", "-1", "--out", d.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("sigma") != std::string::npos);
    CHECK(!fs::exists(d / "manifest.json"));
}

TEST_CASE("usage errors print the synopsis") {
    Run r = run({"bogus"});
    CHECK(r.code == 2);
    CHECK(r.err.find("Usage") != std::string::npos);
    r = run({"equilibria", "--r", "28", "--frobnicate"});
    CHECK(r.code == 2);
    CHECK(r.err.find("Usage") != std::string::npos);
    r = run({});
    CHECK(r.code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("domain errors exit 1 and remove a stale manifest") {
    const fs::path d = scratch_dir("domain");
    REQUIRE(run({"equilibria", "--r", "28", "--out", d.string()}).code == 0);
    REQUIRE(fs::exists(d / "manifest.json"));
    const Run r = run({"separatrix", "--r", "0.5", "--out", d.string()});
    CHECK(r.code == 1);
    CHECK(!fs::exists(d / "manifest.json"));
    CHECK(run({"homoclinic-search", "--bracket", "20,22", "--out", d.string()}).code == 1);
    CHECK(run({"homoclinic-search", "--bracket", "20", "--out", d.string()}).code == 2);
}

TEST_CASE("flags override the config file") {
    const fs::path d = scratch_dir("precedence");
    write_file(d / "c.cfg", "sigma = 16\nb = 3\n");
    const Run r = run({"--config", (d / "c.cfg").string(), "equilibria", "--r", "28", "--sigma", "10", "--out",
                       (d / "o").string()});
    REQUIRE(r.code == 0);
    const Json m = Json::parse(slurp(d / "o" / "manifest.json"));
    CHECK(m["config"]["sigma"] == 10.0);
    CHECK(m["config"]["b"] == 3.0);
    const Run bad = run({"--config", (d / "missing.cfg").string(), "equilibria", "--r", "28"});
    CHECK(bad.code == 2);
}

TEST_CASE("csv outputs are listed with row counts and reproducible") {
    const fs::path d = scratch_dir("repro");
    const std::vector<std::string> args{"return-map", "--r", "28", "--n", "200", "--out", (d / "a").string()};
    REQUIRE(run(args).code == 0);
    const Json m = Json::parse(slurp(d / "a" / "manifest.json"));
    bool listed = false;
    for (const auto& f : m["files"])
        if (f["path"] == "return_map.csv") {
            listed = true;
            CHECK(f["rows"] == 199);
        }
    CHECK(listed);
    std::vector<std::string> again = args;
    again.back() = (d / "b").string();
    REQUIRE(run(again).code == 0);
    CHECK(slurp(d / "a" / "return_map.csv") == slurp(d / "b" / "return_map.csv"));
    CHECK(slurp(d / "a" / "return_map.csv").rfind("zmax_i,zmax_next\n", 0) == 0);
}

TEST_CASE("rerun from the effective config reproduces the csv") {
    const fs::path d = scratch_dir("rerun");
    REQUIRE(run({"--tol-rel", "1e-9", "separatrix", "--r", "15", "--tmax", "20", "--side", "+", "--out",
                 (d / "a").string()})
                .code == 0);
    REQUIRE(run({"--config", (d / "a" / "effective_config.txt").string(), "separatrix", "--r", "15", "--side", "+",
                 "--out", (d / "b").string()})
                .code == 0);
    CHECK(slurp(d / "a" / "gamma1.csv") == slurp(d / "b" / "gamma1.csv"));
    CHECK(slurp(d / "a" / "gamma1_events.csv") == slurp(d / "b" / "gamma1_events.csv"));
    CHECK(!fs::exists(d / "a" / "gamma2.csv"));
}

TEST_CASE("sweep writes both tables") {
    const fs::path d = scratch_dir("sweep");
    const Run r = run({"sweep", "--r-from", "27", "--r-to", "28", "--step", "1", "--transient", "20", "--total", "50",
                       "--out", d.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(d / "sweep.csv").rfind("r,lam1,lam2,lam3,verdict,n_clusters\n", 0) == 0);
    CHECK(slurp(d / "sweep_maxima.csv").rfind("r,zmax\n", 0) == 0);
}

TEST_CASE("scenario report path") {
    const fs::path d = scratch_dir("report");
    // Only argument handling is exercised here; the full report runs in the acceptance binary.
    const Run r = run({"scenario-report", "--renorm", "3", "--out", (d / "rep.json").string()});
    CHECK(r.code == 2);
    CHECK(!fs::exists(d / "manifest.json"));
}

}

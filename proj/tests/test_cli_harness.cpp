#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dropdecomp/errors.hpp"
#include "dropdecomp/fixtures.hpp"
#include "dropdecomp/scenario.hpp"

using namespace dd;
namespace fs = std::filesystem;

#ifndef DD_SCENARIO_DIR
#define DD_SCENARIO_DIR "scenarios"
#endif

namespace {

const fs::path kScenarios = DD_SCENARIO_DIR;

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / ("dropdecomp_test_" + std::to_string(::getpid())) / name;
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_scenario(const std::string& name, const std::string& body) {
    auto p = scratch("scenarios") / name;
    std::ofstream(p) << body;
    return p;
}

struct CliResult {
    int code = -1;
    std::string out;
};

// Runs the CLI binary named by DROPDECOMP_CLI; stdout is captured.
CliResult cli(const std::string& args, const std::string& env = "") {
    const char* bin = std::getenv("DROPDECOMP_CLI");
    REQUIRE_MESSAGE(bin != nullptr, "DROPDECOMP_CLI must name the dropdecomp binary");
    static int counter = 0;
    const auto out = scratch("stdout") / ("run" + std::to_string(counter++) + ".txt");
    const std::string cmd =
        (env.empty() ? "" : "env " + env + " ") + "'" + bin + "' " + args + " > '" + out.string() + "' 2>/dev/null";
    const int st = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.out = slurp(out);
    return r;
}

std::string scen(const std::string& file) { return "'" + (kScenarios / file).string() + "'"; }

io::json parse(const std::string& s) { return io::json::parse(s); }

}  // namespace

// ---------------------------------------------------------------- schema (in process)

TEST_CASE("scenario schema accepts the shipped examples") {
    for (auto f : {"decompose_constant.json", "decompose_endpoint_mass.json", "skeletonize.json", "distinct.json",
                   "cluster.json", "verify_ii.json", "verify_ii_edge.json"}) {
        CAPTURE(f);
        CHECK_NOTHROW(load_scenario(kScenarios / f));
    }
}

TEST_CASE("scenario schema violations are SchemaError") {
    const auto good = parse(R"({"version":1,"op":"distinct","seed":5,"fixture":{"kind":"distinct","N":4}})");
    CHECK_NOTHROW(parse_scenario(good));

    auto bad = good;
    bad["colour"] = "red";
    CHECK_THROWS_AS(parse_scenario(bad), SchemaError);
    bad = good;
    bad["version"] = 2;
    CHECK_THROWS_AS(parse_scenario(bad), SchemaError);
    bad = good;
    bad.erase("seed");
    // the seed may still arrive from the command line, so it is checked at run time
    CHECK_THROWS_AS(run(parse_scenario(bad)), SchemaError);
    bad = good;
    bad["fixture"]["kind"] = "cluster";
    CHECK_THROWS_AS(parse_scenario(bad), SchemaError);
    bad = good;
    bad["tol"] = -1.0;
    CHECK_THROWS_AS(parse_scenario(bad), SchemaError);
    bad = good;
    bad["op"] = "teleport";
    CHECK_THROWS_AS(parse_scenario(bad), SchemaError);
    CHECK_THROWS_AS(parse_scenario(good, "cluster"), SchemaError);
    CHECK_NOTHROW(parse_scenario(good, "distinct"));
    CHECK_THROWS_AS(load_scenario(kScenarios / "does_not_exist.json"), IoError);
}

TEST_CASE("the output directory does not enter the canonical form") {
    auto a = parse(R"({"version":1,"op":"distinct","seed":5,"fixture":{"kind":"distinct","N":4}})");
    auto b = a;
    b["out"] = "/tmp/elsewhere";
    CHECK(parse_scenario(a).canonical() == parse_scenario(b).canonical());
    auto c = a;
    c["seed"] = 6;
    CHECK(parse_scenario(a).canonical() != parse_scenario(c).canonical());
}

TEST_CASE("randomized fixture kinds") {
    CHECK(fixture_is_randomized("endpoint-mass"));
    CHECK(fixture_is_randomized("cluster"));
    CHECK_FALSE(fixture_is_randomized("constant-spectrum"));
}

TEST_CASE("in-process run of the constant-spectrum example") {
    auto r = run(load_scenario(kScenarios / "decompose_constant.json"));
    CHECK(r.pass);
    CHECK(r.payload.at("max_error").get<double>() == 0.0);
    CHECK(r.payload.at("rank_Q0_max").get<int>() == 1);
    CHECK(r.payload.at("rank_Q1_max").get<int>() == 1);
    CHECK(r.payload.at("rank_P1_max").get<int>() == 2);
    const auto& sp = r.payload.at("psi1_spectrum_first_sample");
    REQUIRE(sp.at("interior").size() == 1);
    CHECK(sp.at("interior")[0].at("t").get<double>() == 0.5);
    REQUIRE(r.tables.count("errors.csv") == 1);
    CHECK(r.tables.at("errors.csv").header == std::vector<std::string>{"sample-id", "f-id", "norm-error"});
}

TEST_CASE("fixture generators") {
    EndpointMassParams p;
    p.k = 2;
    p.n = 6;
    auto fx = endpoint_mass_fixture(1, p);
    CHECK(fx.n == 6);
    p.n = 1;
    CHECK_THROWS_AS(endpoint_mass_fixture(1, p), Infeasible);
    auto c = cluster_fixture(3, ClusterRanks{2, 4, 1}, 2, 0.05);
    CHECK(c.phi.size == (2 * 4 + 1) * 2);
    CHECK_THROWS_AS(cluster_fixture(3, ClusterRanks{4, 4, 1}, 2, 0.05), Infeasible);
}

// ---------------------------------------------------------------- the binary

TEST_CASE("constant-spectrum example exits 0 and writes its outputs") {
    const auto dir = scratch("constant");
    auto r = cli("decompose-i --scenario " + scen("decompose_constant.json") + " --out '" + dir.string() + "'");
    CHECK(r.code == 0);
    const auto cert = io::json::parse(slurp(dir / "certificate.json"));
    CHECK(cert.at("pass").get<bool>());
    CHECK(cert.at("max_error").get<double>() == 0.0);
    CHECK(fs::exists(dir / "report.json"));
    const auto csv = slurp(dir / "errors.csv");
    CHECK(csv.rfind("sample-id,f-id,norm-error\n", 0) == 0);
}

TEST_CASE("run defers to the file's operation") {
    auto r = cli("run --scenario " + scen("distinct.json"));
    CHECK(r.code == 0);
    CHECK(io::json::parse(r.out).at("operation") == "distinct");
}

TEST_CASE("a randomized recipe without a seed is a schema error") {
    CHECK(cli("distinct --scenario " + scen("missing_seed.json")).code == 1);
    CHECK(cli("distinct --scenario " + scen("missing_seed.json") + " --seed 5").code == 0);
}

TEST_CASE("payloads are byte-identical across runs and thread counts") {
    for (auto [op, file] : {std::pair{"distinct", "distinct.json"}, std::pair{"cluster", "cluster.json"},
                            std::pair{"skeletonize", "skeletonize.json"}}) {
        CAPTURE(op);
        auto a = cli(std::string(op) + " --scenario " + scen(file), "DROPDECOMP_THREADS=1");
        auto b = cli(std::string(op) + " --scenario " + scen(file), "DROPDECOMP_THREADS=4");
        auto c = cli(std::string(op) + " --scenario " + scen(file), "DROPDECOMP_THREADS=4");
        CHECK(a.code == 0);
        CHECK_FALSE(a.out.empty());
        CHECK(a.out == b.out);
        CHECK(b.out == c.out);
    }
}

TEST_CASE("seed and tolerance overrides change the hash") {
    auto a = cli("distinct --scenario " + scen("distinct.json"));
    auto b = cli("distinct --scenario " + scen("distinct.json") + " --seed 6");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(io::json::parse(a.out).at("scenario_hash") != io::json::parse(b.out).at("scenario_hash"));
    CHECK(cli("distinct --scenario " + scen("distinct.json") + " --tol -3").code == 1);
}

TEST_CASE("engineering errors exit 1") {
    CHECK(cli("teleport --scenario " + scen("distinct.json")).code == 1);
    CHECK(cli("distinct").code == 1);
    CHECK(cli("distinct --scenario /nonexistent/x.json").code == 1);
    CHECK(cli("distinct --scenario " + scen("distinct.json"), "DROPDECOMP_THREADS=lots").code == 1);
    CHECK(cli("cluster --scenario " + scen("distinct.json")).code == 1);
    auto junk = write_scenario("junk.json", "{ not json");
    CHECK(cli("run --scenario '" + junk.string() + "'").code == 1);
    auto extra = write_scenario("extra.json", R"({"version":1,"op":"distinct","seed":5,
        "fixture":{"kind":"distinct","N":4,"shape":"round"}})");
    CHECK(cli("run --scenario '" + extra.string() + "'").code == 1);
}

TEST_CASE("mathematical failures exit 2") {
    for (auto mut : {"sum", "u", "gamma", "J"}) {
        CAPTURE(mut);
        auto p = write_scenario(std::string("mut_") + mut + ".json",
                                std::string(R"({"version":1,"op":"verify-ii","seed":11,
                "fixture":{"kind":"verifier","mutation":")") + mut + R"("}})");
        const auto dir = scratch(std::string("mut_") + mut);
        CHECK(cli("verify-ii --scenario '" + p.string() + "' --out '" + dir.string() + "'").code == 2);
        CHECK_FALSE(io::json::parse(slurp(dir / "certificate.json")).at("pass").get<bool>());
    }
    // the endpoint-mass hypothesis fails for a constant spectrum at 1/2
    auto p = write_scenario("no_mass.json", R"({"version":1,"op":"decompose-i",
        "fixture":{"kind":"constant-spectrum","k":2,"blocks":[0.5],"complex":"single-triangle","F":["identity"]}})");
    CHECK(cli("decompose-i --scenario '" + p.string() + "'").code == 2);
}

TEST_CASE("the edge verifier scenario passes") {
    CHECK(cli("verify-ii --scenario " + scen("verify_ii_edge.json")).code == 0);
    CHECK(cli("verify-ii --scenario " + scen("verify_ii.json")).code == 0);
}

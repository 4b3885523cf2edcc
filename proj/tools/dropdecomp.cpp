// dropdecomp <op> --scenario <path> [--out <dir>] [--seed <u64>] [--tol <float>]
//
// Exit status: 0 pass, 2 mathematical failure, 1 I/O or schema error.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dropdecomp/errors.hpp"
#include "dropdecomp/exec.hpp"
#include "dropdecomp/scenario.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kEngineering = 1;
constexpr int kMath = 2;

// The thread override must be a positive integer when present.
void check_thread_env() {
    const char* s = std::getenv("DROPDECOMP_THREADS");
    if (!s) return;
    try {
        std::size_t used = 0;
        const int n = std::stoi(s, &used);
        if (used == std::string(s).size() && n > 0) {
            dd::set_thread_count(n);
            return;
        }
    } catch (const std::exception&) {
    }
    throw dd::SchemaError(std::string("DROPDECOMP_THREADS must be a positive integer, got '") + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decomposition constructions and verifiers for dimension-drop homomorphisms", "dropdecomp"};
    app.require_subcommand(1, 1);
    std::string scenario_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    const char* ops[] = {"run", "decompose-i", "skeletonize", "distinct", "cluster", "verify-ii"};
    for (const char* op : ops) {
        auto* sub = app.add_subcommand(op, std::string("run the ") + op + " operation");
        sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "seed override for randomized fixtures");
        sub->add_option("--tol", tol, "tolerance override for identity checks");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kEngineering;
    }
    const std::string op = app.get_subcommands().front()->get_name();

    std::string scenario_hash;
    try {
        check_thread_env();
        dd::Scenario s = dd::load_scenario(scenario_path, op);
        if (seed) s.seed = *seed;
        if (tol) {
            if (!(*tol > 0.0)) throw dd::SchemaError("--tol must be positive");
            s.tol = *tol;
        }
        if (out_dir.empty() && s.out) out_dir = *s.out;
        scenario_hash = dd::io::hex64(dd::io::fnv1a(s.canonical().dump()));
        try {
            const dd::RunReport r = dd::run(s);
            if (out_dir.empty())
                std::cout << dd::io::dump(r.payload);
            else
                dd::write_report(r, out_dir);
            std::cerr << "dropdecomp: " << r.op << (r.pass ? " pass" : " FAIL") << " scenario " << r.scenario_hash
                      << " payload " << r.payload_hash() << "\n";
            return r.pass ? kPass : kMath;
        } catch (const dd::Error& e) {
            if (!e.math()) throw;
            std::cerr << "dropdecomp: " << e.kind() << " error: " << e.what() << "\n";
            if (!out_dir.empty()) {
                std::error_code ec;
                std::filesystem::create_directories(out_dir, ec);
                const dd::io::json fail{{"operation", s.op},
                                        {"scenario_hash", scenario_hash},
                                        {"error", e.kind()},
                                        {"message", e.what()},
                                        {"pass", false}};
                dd::io::write_text(std::filesystem::path(out_dir) / "failure.json", dd::io::dump(fail));
            }
            return kMath;
        }
    } catch (const dd::Error& e) {
        std::cerr << "dropdecomp: " << e.kind() << " error: " << e.what() << "\n";
        return e.math() ? kMath : kEngineering;
    } catch (const std::exception& e) {
        std::cerr << "dropdecomp: internal error: " << e.what() << "\n";
        return kEngineering;
    }
}

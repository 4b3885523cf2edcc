#pragma once
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "dropdecomp/io_json.hpp"

namespace dd {

// Operations reachable from a scenario file.
inline constexpr const char* kOperations[] = {"decompose-i", "skeletonize", "distinct", "cluster", "verify-ii"};

struct Scenario {
    int version = 1;
    std::string op;
    std::optional<std::uint64_t> seed;
    double tol = 1e-8;          // pass threshold for identities (sums, orthogonality, tensor form)
    io::json fixture;           // {"kind": ..., params}
    io::json params;            // operation parameters
    std::optional<std::string> out;

    // Canonical JSON of everything that influences the payload (no output dir).
    io::json canonical() const;
};

// Validates against the published schema; throws SchemaError. `cli_op` is the
// subcommand ("run" defers to the file's op).
Scenario parse_scenario(const io::json& doc, const std::string& cli_op = "run");
Scenario load_scenario(const std::filesystem::path& path, const std::string& cli_op = "run");

// Whether a fixture kind draws random numbers (and therefore needs a seed).
bool fixture_is_randomized(const std::string& kind);

struct RunReport {
    std::string scenario_hash;
    std::string op;
    bool pass = false;
    double wall_seconds = 0.0;            // kept out of the payload
    io::json payload;                     // deterministic given scenario + seed
    io::json environment;                 // compiler, library versions, threads
    std::map<std::string, io::CsvTable> tables;  // file name -> table
    std::map<std::string, std::string> texts;    // file name -> text

    std::string payload_hash() const;
};

// Dispatches to the named operation. Mathematical errors propagate as the
// library's math errors; schema problems raise SchemaError.
RunReport run(const Scenario& s);

// certificate.json (payload), report.json (metadata) and every table.
void write_report(const RunReport& r, const std::filesystem::path& dir);

}  // namespace dd

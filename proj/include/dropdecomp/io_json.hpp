#pragma once
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dropdecomp/decomp_one.hpp"
#include "dropdecomp/decomp_two.hpp"

namespace dd::io {

using json = nlohmann::json;

// Doubles are written with 17 significant digits so every value round-trips
// and equal inputs give equal bytes.
std::string num(double v);

json to_json(const Point& p);
json to_json(const Mat& m);  // {"re": [[...]], "im": [[...]]}
json to_json(const SpectralMultiset& s);

json certificate_json(const DecompositionCertificate& c);
json skeleton_json(const SkeletonReduction& r);
json distinct_json(const DistinctReport& r);
json cluster_json(const ClusterField& c);
json verdict_json(const Verdict& v);

// Trace of a projection rounded to the nearest integer.
int projection_rank(const Mat& p);

std::string dump(const json& j);  // sorted keys, indent 2, trailing newline
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t h);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string str() const;
};

// Throws IoError.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
// Throws IoError when unreadable and SchemaError when not valid JSON.
json read_json(const std::filesystem::path& path);

}  // namespace dd::io

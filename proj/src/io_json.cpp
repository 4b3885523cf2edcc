#include "dropdecomp/io_json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dropdecomp/errors.hpp"

namespace dd::io {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json to_json(const Point& p) {
    json ids = json::array(), ws = json::array();
    for (int i = 0; i < p.count(); ++i) {
        ids.push_back(p.v[i]);
        ws.push_back(p.w[i]);
    }
    return json{{"vertices", ids}, {"weights", ws}};
}

json to_json(const Mat& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json a = json::array(), b = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            a.push_back(m(r, c).real());
            b.push_back(m(r, c).imag());
        }
        re.push_back(a);
        im.push_back(b);
    }
    return json{{"re", re}, {"im", im}};
}

json to_json(const SpectralMultiset& s) {
    json interior = json::array();
    for (auto& [t, m] : s.interior) interior.push_back(json{{"t", t}, {"multiplicity", m}});
    return json{{"k", s.k},
                {"total_n", s.total_n},
                {"end0_units", s.end0_units},
                {"end1_units", s.end1_units},
                {"interior", interior}};
}

int projection_rank(const Mat& p) {
    if (p.size() == 0) return 0;
    return static_cast<int>(std::lround(p.trace().real()));
}

json certificate_json(const DecompositionCertificate& c) {
    json j;
    j["eta"] = c.eta;
    j["epsilon"] = c.epsilon;
    j["n"] = c.n;
    j["k"] = c.k;
    j["k_prime"] = c.k_prime;
    j["k1_prime"] = c.k1_prime;
    j["refinements"] = c.refinements;
    j["tau_pairing"] = c.tau_pairing;
    j["tau_oscillation"] = c.tau_oscillation;
    j["sample_count"] = c.samples.size();
    j["max_error"] = c.max_error;
    j["rank_Q0_max"] = c.rank_Q0_max;
    j["rank_Q1_max"] = c.rank_Q1_max;
    j["sum_error"] = c.sum_error;
    j["orth_error"] = c.orth_error;
    j["xi1"] = c.xi1;
    j["xi2"] = c.xi2;
    j["sdp_identity"] = c.sdp_identity;
    j["sdp_mismatches"] = c.sdp_mismatches;
    j["disk_boundary_error"] = c.disk_boundary_error;
    j["partition_trace"] = c.partition_trace;
    int p1_min = c.P1.empty() ? 0 : projection_rank(c.P1[0]), p1_max = p1_min;
    for (auto& p : c.P1) {
        p1_min = std::min(p1_min, projection_rank(p));
        p1_max = std::max(p1_max, projection_rank(p));
    }
    j["rank_P1_min"] = p1_min;
    j["rank_P1_max"] = p1_max;
    if (!c.psi1.fibers.empty()) j["psi1_spectrum_first_sample"] = to_json(spectrum_at(c.psi1, 0));
    return j;
}

json skeleton_json(const SkeletonReduction& r) {
    json j;
    j["subdivisions"] = r.subdivisions;
    j["triangles"] = r.complex ? r.complex->triangles().size() : 0;
    j["skeleton_edges"] = r.skeleton ? r.skeleton->edges().size() : 0;
    j["sigma"] = r.sigma;
    j["step_pairing"] = r.step_pairing;
    j["error"] = r.error;
    j["pairing"] = r.pairing;
    j["retraction_max_displacement"] = r.retraction.max_displacement;
    j["samples"] = r.phi1.fibers.size();
    return j;
}

json distinct_json(const DistinctReport& r) {
    return json{{"min_gap", r.min_gap},
                {"error", r.error},
                {"pairing", r.pairing},
                {"samples", r.psi.fibers.size()}};
}

json cluster_json(const ClusterField& c) {
    json j;
    j["ranks"] = json{{"l1", c.ranks.l1}, {"l2", c.ranks.l2}, {"r", c.ranks.r}};
    j["k"] = c.k;
    j["target_rank"] = c.target_rank;
    j["resolution_error"] = c.resolution_error;
    j["endpoint_error"] = c.endpoint_error;
    j["max_jump"] = c.max_jump;
    j["sigma_prime"] = c.sigma_prime;
    j["conclusion_error"] = c.conclusion_error;
    j["samples"] = c.P.size();
    int p0_min = c.p0.empty() ? 0 : projection_rank(c.p0[0]), p0_max = p0_min;
    for (auto& p : c.p0) {
        p0_min = std::min(p0_min, projection_rank(p));
        p0_max = std::max(p0_max, projection_rank(p));
    }
    j["rank_p0_min"] = p0_min;
    j["rank_p0_max"] = p0_max;
    return j;
}

json verdict_json(const Verdict& v) {
    json j;
    j["pass"] = v.pass();
    j["clauses"] = v.clauses;
    j["witnesses"] = v.witnesses;
    j["measures"] = v.measures;
    j["failures"] = v.failures();
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string CsvTable::str() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    line(header);
    for (auto& r : rows) line(r);
    return os.str();
}

std::string read_text(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) throw IoError("file not found: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string() + ": not valid JSON (" + e.what() + ")");
    }
}

}  // namespace dd::io

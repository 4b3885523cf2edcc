#include "dropdecomp/scenario.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <set>

#include "dropdecomp/errors.hpp"
#include "dropdecomp/exec.hpp"
#include "dropdecomp/fixtures.hpp"

namespace dd {

using io::json;

namespace {

// ---------------------------------------------------------------- schema helpers

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto& [key, _] : obj.items())
        if (!ok.count(key)) throw SchemaError(where + ": unknown key '" + key + "'");
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

int get_int(const json& obj, const std::string& where, const char* key, int fallback, int lo = 0) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw SchemaError(where + "." + key + " must be an integer");
    const auto x = v->get<long long>();
    if (x < lo || x > 1000000) throw SchemaError(where + "." + key + " out of range");
    return static_cast<int>(x);
}

double get_num(const json& obj, const std::string& where, const char* key, double fallback, bool positive = true) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) throw SchemaError(where + "." + key + " must be a number");
    const double x = v->get<double>();
    if (!std::isfinite(x) || (positive && !(x > 0.0)) || x < 0.0)
        throw SchemaError(where + "." + key + " must be " + (positive ? "positive" : "non-negative"));
    return x;
}

bool get_bool(const json& obj, const std::string& where, const char* key, bool fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw SchemaError(where + "." + key + " must be a boolean");
    return v->get<bool>();
}

std::string get_str(const json& obj, const std::string& where, const char* key, const std::string& fallback,
                    std::initializer_list<const char*> allowed) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string()) throw SchemaError(where + "." + key + " must be a string");
    const auto s = v->get<std::string>();
    for (auto a : allowed)
        if (s == a) return s;
    throw SchemaError(where + "." + key + ": unsupported value '" + s + "'");
}

Exec get_exec(const json& params, const std::string& where) {
    return get_str(params, where, "exec", "parallel", {"parallel", "serial"}) == "serial" ? Exec::serial
                                                                                            : Exec::parallel;
}

struct KindInfo {
    const char* kind;
    const char* op;
    bool randomized;
};
constexpr KindInfo kKinds[] = {
    {"endpoint-mass", "decompose-i", true}, {"constant-spectrum", "decompose-i", false},
    {"skeleton", "skeletonize", true},      {"distinct", "distinct", true},
    {"cluster", "cluster", true},           {"verifier", "verify-ii", true},
};

const KindInfo* kind_info(const std::string& kind) {
    for (auto& k : kKinds)
        if (kind == k.kind) return &k;
    return nullptr;
}

void validate_fixture(const json& f, const std::string& kind) {
    const std::string w = "fixture";
    if (kind == "endpoint-mass") {
        only_keys(f, w, {"kind", "k", "n", "pad", "epsilon", "kappa", "drift", "constant"});
        get_int(f, w, "k", 2, 1);
        get_int(f, w, "n", 12, 1);
        get_int(f, w, "pad", 0);
        get_num(f, w, "epsilon", 0.2);
        get_num(f, w, "kappa", 1e-7, false);
        get_num(f, w, "drift", 1e-11, false);
        get_bool(f, w, "constant", false);
    } else if (kind == "constant-spectrum") {
        only_keys(f, w, {"kind", "k", "blocks", "complex", "epsilon", "F"});
        get_int(f, w, "k", 2, 1);
        get_num(f, w, "epsilon", 0.2);
        get_str(f, w, "complex", "single-triangle", {"single-triangle", "hexagon-disk", "unit-square"});
        const json* b = find(f, "blocks");
        if (!b || !b->is_array() || b->empty()) throw SchemaError("fixture.blocks must be a non-empty array");
        for (auto& e : *b) {
            const bool end = e.is_string() && (e == "0" || e == "1");
            const bool mid = e.is_number() && e.get<double>() > 0.0 && e.get<double>() < 1.0;
            if (!end && !mid) throw SchemaError("fixture.blocks entries are \"0\", \"1\" or numbers in (0,1)");
        }
        if (const json* F = find(f, "F")) {
            if (!F->is_array() || F->empty()) throw SchemaError("fixture.F must be a non-empty array");
            for (auto& e : *F)
                if (!(e == "identity" || e == "probe" || e == "unit"))
                    throw SchemaError("fixture.F entries are \"identity\", \"probe\" or \"unit\"");
        }
    } else if (kind == "skeleton") {
        only_keys(f, w, {"kind", "N", "samples", "through_barycenter", "constant_at_vertex"});
        get_int(f, w, "N", 3, 1);
        get_int(f, w, "samples", 33, 2);
        get_bool(f, w, "through_barycenter", false);
        get_bool(f, w, "constant_at_vertex", false);
    } else if (kind == "distinct") {
        only_keys(f, w, {"kind", "N", "samples"});
        get_int(f, w, "N", 4, 1);
        get_int(f, w, "samples", 21, 3);
    } else if (kind == "cluster") {
        only_keys(f, w, {"kind", "l1", "l2", "r", "k", "eta", "samples"});
        get_int(f, w, "l1", 2, 1);
        get_int(f, w, "l2", 4, 1);
        get_int(f, w, "r", 1);
        get_int(f, w, "k", 2, 1);
        get_num(f, w, "eta", 0.05);
        get_int(f, w, "samples", 17, 2);
    } else if (kind == "verifier") {
        only_keys(f, w, {"kind", "on_edge", "mutation"});
        get_bool(f, w, "on_edge", false);
        get_str(f, w, "mutation", "none", {"none", "sum", "u", "gamma", "J"});
    }
}

void validate_params(const json& p, const std::string& op) {
    const std::string w = "params";
    if (op == "decompose-i") {
        only_keys(p, w, {"eta", "edge_samples", "outer_rings", "inner_rings", "refine_cap", "check_tau",
                         "require_endpoint_mass", "exec"});
        get_bool(p, w, "require_endpoint_mass", true);
        get_num(p, w, "eta", 1.0);
        get_int(p, w, "edge_samples", 8, 2);
        get_int(p, w, "outer_rings", 6, 1);
        get_int(p, w, "inner_rings", 4, 1);
        get_int(p, w, "refine_cap", 2);
        get_bool(p, w, "check_tau", true);
        get_exec(p, w);
    } else if (op == "skeletonize") {
        only_keys(p, w, {"epsilon", "eta", "eta_prime", "max_subdivisions", "puncture_grid", "exec"});
        get_num(p, w, "epsilon", 1.0);
        get_num(p, w, "eta", 1.0);
        get_num(p, w, "eta_prime", 1.0);
        get_int(p, w, "max_subdivisions", 6);
        get_int(p, w, "puncture_grid", 12, 2);
        get_exec(p, w);
    } else if (op == "distinct") {
        only_keys(p, w, {"epsilon", "eta"});
        get_num(p, w, "epsilon", 1.0);
        get_num(p, w, "eta", 1.0);
    } else if (op == "cluster") {
        only_keys(p, w, {"exec"});
        get_exec(p, w);
    } else if (op == "verify-ii") {
        only_keys(p, w, {"variant", "J", "density_grid", "epsilon"});
        get_str(p, w, "variant", "whole", {"whole", "edge"});
        get_int(p, w, "J", 1, 1);
        get_num(p, w, "density_grid", 0.05);
        get_num(p, w, "epsilon", 1.0);
    }
}

// ---------------------------------------------------------------- operations

SimplicialComplex2 named_complex(const std::string& name) {
    if (name == "hexagon-disk") return hexagon_disk();
    if (name == "unit-square") return unit_square();
    return single_triangle();
}

std::string point_str(const Point& p) {
    std::string s;
    for (int i = 0; i < p.count(); ++i) s += (i ? ";" : "") + std::to_string(p.v[i]) + ":" + io::num(p.w[i]);
    return s;
}

bool same_fiber(const Fiber& a, const Fiber& b) {
    if (a.u.rows() != b.u.rows() || a.u.cols() != b.u.cols() || a.u != b.u) return false;
    if (a.blocks.size() != b.blocks.size()) return false;
    for (std::size_t i = 0; i < a.blocks.size(); ++i)
        if (a.blocks[i].kind != b.blocks[i].kind || a.blocks[i].t != b.blocks[i].t || !(a.blocks[i].x == b.blocks[i].x))
            return false;
    return true;
}

void run_decompose(const Scenario& s, RunReport& r) {
    const json& f = s.fixture;
    const json& p = s.params;
    const std::string kind = f["kind"];
    DecompOptions opts;
    opts.eta = get_num(p, "params", "eta", 0.0, false);
    opts.edge_samples = get_int(p, "params", "edge_samples", opts.edge_samples, 2);
    opts.outer_rings = get_int(p, "params", "outer_rings", opts.outer_rings, 1);
    opts.inner_rings = get_int(p, "params", "inner_rings", opts.inner_rings, 1);
    opts.refine_cap = get_int(p, "params", "refine_cap", opts.refine_cap);
    opts.check_tau = get_bool(p, "params", "check_tau", opts.check_tau);
    opts.require_endpoint_mass = get_bool(p, "params", "require_endpoint_mass", true);
    opts.exec = get_exec(p, "params");

    DecompositionCertificate cert;
    int k = 1;
    if (kind == "endpoint-mass") {
        EndpointMassParams ep;
        ep.k = get_int(f, "fixture", "k", ep.k, 1);
        ep.n = get_int(f, "fixture", "n", ep.n, 1);
        ep.pad = get_int(f, "fixture", "pad", ep.pad);
        ep.epsilon = get_num(f, "fixture", "epsilon", ep.epsilon);
        ep.kappa = get_num(f, "fixture", "kappa", ep.kappa, false);
        ep.drift = get_num(f, "fixture", "drift", ep.drift, false);
        ep.constant = get_bool(f, "fixture", "constant", ep.constant);
        auto fx = endpoint_mass_fixture(*s.seed, ep);
        k = ep.k;
        cert = decompose_theorem_I(fx.complex, fx.sampler, fx.domain, fx.size, fx.F, fx.epsilon, opts);
    } else {
        k = get_int(f, "fixture", "k", 2, 1);
        const DomainSpec d{DomainKind::Ik, k, 1};
        std::vector<Block> blocks;
        for (auto& e : f["blocks"])
            blocks.push_back(e.is_string() ? (e == "0" ? Block::u0() : Block::u1()) : Block::in(e.get<double>()));
        int size = 0;
        for (auto& b : blocks) size += d.block_size(b);
        const Fiber fiber{Mat::Identity(size, size), blocks};
        std::vector<DimensionDropElement> F;
        const json names = f.contains("F") ? f["F"] : json::array({"identity"});
        for (auto& n : names) {
            if (n == "identity") F.push_back(DimensionDropElement::identity_fn(k));
            else if (n == "unit") F.push_back(DimensionDropElement::unit(k));
            else F.push_back(probe_element(k));
        }
        const auto X = named_complex(get_str(f, "fixture", "complex", "single-triangle",
                                             {"single-triangle", "hexagon-disk", "unit-square"}));
        cert = decompose_theorem_I(X, [fiber](const Point&) { return fiber; }, d, size, F,
                                   get_num(f, "fixture", "epsilon", 0.2), opts);
    }

    r.payload = io::certificate_json(cert);
    r.pass = cert.max_error < cert.epsilon && cert.rank_Q0_max <= k && cert.rank_Q1_max <= k &&
             cert.sum_error <= s.tol && cert.orth_error <= s.tol && cert.sdp_identity;

    io::CsvTable errors{{"sample-id", "f-id", "norm-error"}, {}};
    for (std::size_t i = 0; i < cert.errors.size(); ++i)
        for (std::size_t j = 0; j < cert.errors[i].size(); ++j)
            errors.rows.push_back({std::to_string(i), std::to_string(j), io::num(cert.errors[i][j])});
    io::CsvTable samples{{"sample-id", "kind", "point", "rank-q0", "rank-q1", "rank-p1"}, {}};
    for (std::size_t i = 0; i < cert.samples.size(); ++i)
        samples.rows.push_back({std::to_string(i), i < cert.sample_kind.size() ? cert.sample_kind[i] : "",
                                point_str(cert.samples[i]),
                                std::to_string(i < cert.Q0.size() ? io::projection_rank(cert.Q0[i]) : 0),
                                std::to_string(i < cert.Q1.size() ? io::projection_rank(cert.Q1[i]) : 0),
                                std::to_string(i < cert.P1.size() ? io::projection_rank(cert.P1[i]) : 0)});
    r.tables["errors.csv"] = std::move(errors);
    r.tables["samples.csv"] = std::move(samples);
    std::string trace;
    for (auto& line : cert.partition_trace) trace += line + "\n";
    r.texts["partition_trace.txt"] = trace;
}

void run_skeleton(const Scenario& s, RunReport& r) {
    const json& f = s.fixture;
    const json& p = s.params;
    auto fx = skeleton_fixture(*s.seed, get_int(f, "fixture", "N", 3, 1), get_int(f, "fixture", "samples", 33, 2),
                               get_bool(f, "fixture", "through_barycenter", false),
                               get_bool(f, "fixture", "constant_at_vertex", false));
    const double eps = get_num(p, "params", "epsilon", fx.epsilon);
    const double eta = get_num(p, "params", "eta", fx.eta);
    SkeletonOptions opts;
    opts.eta_prime = get_num(p, "params", "eta_prime", 0.0, false);
    opts.max_subdivisions = get_int(p, "params", "max_subdivisions", opts.max_subdivisions);
    opts.puncture_grid = get_int(p, "params", "puncture_grid", opts.puncture_grid, 2);
    opts.exec = get_exec(p, "params");
    auto red = reduce_to_skeleton(fx.phi, fx.F, eps, eta, opts);
    r.payload = io::skeleton_json(red);
    r.payload["epsilon"] = eps;
    r.payload["eta"] = eta;
    r.pass = red.error < eps && red.pairing < eta && red.sigma > 0.0;
    io::CsvTable punct{{"triangle", "puncture", "margin"}, {}};
    for (auto& [tri, pt] : red.punctures)
        punct.rows.push_back({std::to_string(tri), point_str(pt), io::num(red.margins.at(tri))});
    r.tables["punctures.csv"] = std::move(punct);
}

void run_distinct(const Scenario& s, RunReport& r) {
    const json& f = s.fixture;
    auto fx = distinct_fixture(*s.seed, get_int(f, "fixture", "N", 4, 1), get_int(f, "fixture", "samples", 21, 3));
    const double eps = get_num(s.params, "params", "epsilon", fx.epsilon);
    const double eta = get_num(s.params, "params", "eta", fx.eta);
    auto rep = make_distinct_spectrum(fx.phi, fx.F, eps, eta);
    const PathMetric metric(*fx.phi.domain_space);
    bool endpoints_same = true;
    io::CsvTable gaps{{"sample-id", "time", "gap"}, {}};
    io::CsvTable errors{{"sample-id", "f-id", "norm-error"}, {}};
    for (std::size_t i = 0; i < rep.psi.fibers.size(); ++i) {
        const double t = fx.phi.times[i];
        if (t <= 0.0 || t >= 1.0) endpoints_same = endpoints_same && same_fiber(fx.phi.fibers[i], rep.psi.fibers[i]);
        gaps.rows.push_back({std::to_string(i), io::num(t), io::num(spectral_gap(rep.psi.fibers[i], metric))});
        for (std::size_t j = 0; j < fx.F.size(); ++j) {
            const Element e(fx.F[j]);
            errors.rows.push_back({std::to_string(i), std::to_string(j),
                                   io::num(op_norm(assemble_hom(fx.phi, e, i) - assemble_hom(rep.psi, e, i)))});
        }
    }
    r.payload = io::distinct_json(rep);
    r.payload["epsilon"] = eps;
    r.payload["eta"] = eta;
    r.payload["endpoints_unchanged"] = endpoints_same;
    r.pass = endpoints_same && rep.min_gap > 0.0 && rep.error < eps;
    r.tables["gaps.csv"] = std::move(gaps);
    r.tables["errors.csv"] = std::move(errors);
}

void run_cluster(const Scenario& s, RunReport& r) {
    const json& f = s.fixture;
    ClusterRanks ranks{get_int(f, "fixture", "l1", 2, 1), get_int(f, "fixture", "l2", 4, 1),
                       get_int(f, "fixture", "r", 1)};
    auto fx = cluster_fixture(*s.seed, ranks, get_int(f, "fixture", "k", 2, 1), get_num(f, "fixture", "eta", 0.05),
                              get_int(f, "fixture", "samples", 17, 2));
    auto field = cluster_projections(fx.phi, fx.base, fx.eta, fx.ranks, fx.k, fx.G, get_exec(s.params, "params"));
    bool ranks_ok = true;
    io::CsvTable table{{"sample-id", "cluster", "rank-P", "rank-p", "target"}, {}};
    for (std::size_t i = 0; i < field.p.size(); ++i)
        for (std::size_t j = 0; j < field.p[i].size(); ++j) {
            const int rp = io::projection_rank(field.p[i][j]);
            ranks_ok = ranks_ok && rp == field.target_rank[j];
            table.rows.push_back({std::to_string(i), std::to_string(j), std::to_string(io::projection_rank(field.P[i][j])),
                                  std::to_string(rp), std::to_string(field.target_rank[j])});
        }
    r.payload = io::cluster_json(field);
    r.payload["eta"] = fx.eta;
    r.payload["epsilon"] = fx.epsilon;
    r.payload["ranks_met"] = ranks_ok;
    r.pass = ranks_ok && field.resolution_error <= s.tol && field.endpoint_error <= s.tol &&
             field.conclusion_error < fx.epsilon;
    r.tables["ranks.csv"] = std::move(table);
}

void run_verify(const Scenario& s, RunReport& r) {
    const json& f = s.fixture;
    const json& p = s.params;
    const std::string variant = get_str(p, "params", "variant", "whole", {"whole", "edge"});
    auto fx = verifier_fixture(*s.seed, get_bool(f, "fixture", "on_edge", false));
    const std::string mutation = get_str(f, "fixture", "mutation", "none", {"none", "sum", "u", "gamma", "J"});
    if (mutation != "none") mutate_verifier(fx, mutation);
    fx.params.J = get_int(p, "params", "J", fx.params.J, 1);
    fx.params.density_grid = get_num(p, "params", "density_grid", fx.params.density_grid);
    fx.params.epsilon = get_num(p, "params", "epsilon", fx.params.epsilon);
    fx.params.tol = s.tol;
    const Verdict v = variant == "edge" ? verify_subcomplex_variant(fx.dec, fx.phi, fx.psi, fx.edge, fx.F, fx.params)
                                        : verify_decomposition(fx.dec, fx.phi, fx.psi, fx.F, fx.params);
    r.payload = io::verdict_json(v);
    r.payload["variant"] = variant;
    r.pass = v.pass();
    io::CsvTable table{{"clause", "pass"}, {}};
    for (auto& [name, ok] : v.clauses) table.rows.push_back({name, ok ? "true" : "false"});
    r.tables["clauses.csv"] = std::move(table);
}

json environment() {
    json e;
#ifdef __VERSION__
    e["compiler"] = __VERSION__;
#endif
    e["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    e["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#ifdef _OPENMP
    e["openmp"] = _OPENMP;
#endif
    e["threads"] = thread_count();
    return e;
}

}  // namespace

bool fixture_is_randomized(const std::string& kind) {
    const KindInfo* k = kind_info(kind);
    return k && k->randomized;
}

json Scenario::canonical() const {
    json j{{"version", version}, {"op", op}, {"tol", tol}, {"fixture", fixture}, {"params", params}};
    if (seed) j["seed"] = *seed;
    return j;
}

Scenario parse_scenario(const json& doc, const std::string& cli_op) {
    if (!doc.is_object()) throw SchemaError("scenario must be a JSON object");
    only_keys(doc, "scenario", {"version", "op", "seed", "tol", "fixture", "params", "out"});
    Scenario s;
    const json* v = find(doc, "version");
    if (!v || !v->is_number_integer() || v->get<long long>() != 1) throw SchemaError("scenario.version must be 1");

    const bool known_cli = cli_op == "run" || std::any_of(std::begin(kOperations), std::end(kOperations),
                                                          [&](const char* o) { return cli_op == o; });
    if (!known_cli) throw SchemaError("unknown operation '" + cli_op + "'");
    if (const json* o = find(doc, "op")) {
        if (!o->is_string()) throw SchemaError("scenario.op must be a string");
        s.op = o->get<std::string>();
    }
    if (s.op.empty()) {
        if (cli_op == "run") throw SchemaError("scenario.op is required with the run subcommand");
        s.op = cli_op;
    }
    if (std::none_of(std::begin(kOperations), std::end(kOperations), [&](const char* o) { return s.op == o; }))
        throw SchemaError("unknown operation '" + s.op + "'");
    if (cli_op != "run" && cli_op != s.op)
        throw SchemaError("subcommand '" + cli_op + "' does not match scenario.op '" + s.op + "'");

    if (const json* sd = find(doc, "seed")) {
        if (!sd->is_number_unsigned() && !(sd->is_number_integer() && sd->get<long long>() >= 0))
            throw SchemaError("scenario.seed must be a non-negative integer");
        s.seed = sd->get<std::uint64_t>();
    }
    s.tol = get_num(doc, "scenario", "tol", s.tol);
    if (const json* o = find(doc, "out")) {
        if (!o->is_string()) throw SchemaError("scenario.out must be a string");
        s.out = o->get<std::string>();
    }

    const json* f = find(doc, "fixture");
    if (!f || !f->is_object()) throw SchemaError("scenario.fixture must be an object");
    const json* kind = find(*f, "kind");
    if (!kind || !kind->is_string()) throw SchemaError("fixture.kind must be a string");
    const KindInfo* info = kind_info(kind->get<std::string>());
    if (!info) throw SchemaError("unknown fixture kind '" + kind->get<std::string>() + "'");
    if (s.op != info->op)
        throw SchemaError(std::string("fixture kind '") + info->kind + "' does not serve operation '" + s.op + "'");
    validate_fixture(*f, info->kind);
    s.fixture = *f;

    s.params = json::object();
    if (const json* p = find(doc, "params")) {
        if (!p->is_object()) throw SchemaError("scenario.params must be an object");
        s.params = *p;
    }
    validate_params(s.params, s.op);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path, const std::string& cli_op) {
    return parse_scenario(io::read_json(path), cli_op);
}

std::string RunReport::payload_hash() const { return io::hex64(io::fnv1a(io::dump(payload))); }

RunReport run(const Scenario& s) {
    const std::string kind = s.fixture.at("kind");
    if (fixture_is_randomized(kind) && !s.seed)
        throw SchemaError("fixture kind '" + kind + "' is randomized and needs a seed");
    RunReport r;
    r.op = s.op;
    r.scenario_hash = io::hex64(io::fnv1a(s.canonical().dump()));
    const auto t0 = std::chrono::steady_clock::now();
    if (s.op == "decompose-i") run_decompose(s, r);
    else if (s.op == "skeletonize") run_skeleton(s, r);
    else if (s.op == "distinct") run_distinct(s, r);
    else if (s.op == "cluster") run_cluster(s, r);
    else if (s.op == "verify-ii") run_verify(s, r);
    else throw SchemaError("unknown operation '" + s.op + "'");
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.payload["pass"] = r.pass;
    r.payload["operation"] = s.op;
    r.payload["scenario_hash"] = r.scenario_hash;
    r.environment = environment();
    return r;
}

void write_report(const RunReport& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    io::write_text(dir / "certificate.json", io::dump(r.payload));
    const json meta{{"scenario_hash", r.scenario_hash}, {"operation", r.op},
                    {"pass", r.pass},                   {"wall_seconds", r.wall_seconds},
                    {"payload_hash", r.payload_hash()}, {"environment", r.environment}};
    io::write_text(dir / "report.json", io::dump(meta));
    for (auto& [name, table] : r.tables) io::write_text(dir / name, table.str());
    for (auto& [name, text] : r.texts) io::write_text(dir / name, text);
}

}  // namespace dd

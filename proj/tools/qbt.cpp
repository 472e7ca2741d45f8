// qbt: exclusion, face sweeps, self-testing and XOR-game reports.

#include "qbell/qbell.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

using namespace qbell;

namespace {

constexpr int kExitOk = 0, kExitError = 1, kExitUndecided = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text << "\n";
}

std::string num_mode(const std::string& fallback) {
    const char* v = std::getenv("QBT_NUM_MODE");
    std::string m = v ? v : fallback;
    if (m != "rational" && m != "float") throw UsageError("QBT_NUM_MODE must be rational or float");
    return m;
}

json envelope(const std::vector<std::string>& argv, const std::string& digest_input) {
    return json{{"command", argv}, {"inputs_sha256", sha256_hex(digest_input)}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---- exclude ----

struct ExcludeArgs {
    std::string box_file, face_file, method = "both", out;
    int pr = 0;
    double tol = 1e-6;
};

int cmd_exclude(const ExcludeArgs& a, const std::vector<std::string>& argv) {
    const auto t0 = std::chrono::steady_clock::now();
    const int sources = int(!a.box_file.empty()) + int(!a.face_file.empty()) + int(a.pr != 0);
    if (sources != 1) throw UsageError("give exactly one of --box, --pr, --face");
    const Method method = method_from_name(a.method);
    const std::string mode = num_mode("rational");

    std::string digest_input;
    Box<Rational> exact;
    std::optional<Box<double>> floating;
    if (!a.box_file.empty()) {
        digest_input = read_file(a.box_file);
        auto any = parse_box(digest_input);
        if (auto* r = std::get_if<Box<Rational>>(&any))
            exact = *r;
        else
            floating = std::get<Box<double>>(any);
    } else if (!a.face_file.empty()) {
        digest_input = read_file(a.face_file);
        exact = face_box(face_spec_from_json<Rational>(json::parse(digest_input)));
    } else {
        if (a.pr < 2) throw UsageError("--pr needs k >= 2");
        digest_input = "pr:" + std::to_string(a.pr);
        exact = pr_box<Rational>(a.pr);
    }

    ExcludeOutcome res;
    if (floating)
        res = run_exclude(*floating, method, a.tol);
    else if (mode == "float")
        res = run_exclude(exact.convert<double>(), method, a.tol);
    else
        res = run_exclude(exact, method, a.tol);

    json rep = envelope(argv, digest_input);
    rep["results"] = res.report;
    rep["wall_seconds"] = seconds_since(t0);
    write_output(a.out, rep.dump(2));
    return res.decided ? kExitOk : kExitUndecided;
}

// ---- faces-sweep ----

struct SweepArgs {
    int k = 2, dim = 1, grid = 1;
    unsigned long seed = 1;
    unsigned jobs = default_jobs();
    std::string method = "analytic", out;
};

struct SweepRow {
    std::string spec, method, value;
    bool excluded = false;
    std::string tmpl, stage, closed_form;
};

int cmd_faces_sweep(const SweepArgs& a, const std::vector<std::string>& argv) {
    const auto t0 = std::chrono::steady_clock::now();
    if (a.k < 2) throw UsageError("--k must be >= 2");
    if (a.dim < 0 || a.dim > 4 * a.k - 4)
        throw UsageError("--dim must lie in [0, 4k-4]; faces of dimension > 4k-4 can contain quantum boxes");
    if (a.grid < 1) throw UsageError("--grid must be >= 1");
    const Method method = method_from_name(a.method);

    // Specs are drawn up front from one seeded stream, so the output does not depend on --jobs.
    std::mt19937_64 rng(a.seed);
    std::vector<FaceSpec<Rational>> specs;
    for (const auto& ids : subsets_of_size(4 * a.k, a.dim))
        for (int s = 0; s < a.grid; ++s) specs.push_back(sample_face_spec(a.k, ids, rng));

    std::vector<SweepRow> rows(specs.size());
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::string first_error;
    auto worker = [&] {
        AnalyticExcluder ex(a.k);
        for (std::size_t i; (i = next++) < specs.size();) {
            try {
                const auto box = face_box(specs[i]);
                SweepRow& row = rows[i];
                row.spec = face_spec_to_json(specs[i]).dump();
                row.method = method_name(method);
                bool hit = false;
                if (method != Method::sdp) {
                    auto r = ex.run(box, true);
                    hit = r.excluded;
                    row.value = to_string(r.value);
                    if (r.tmpl) row.tmpl = template_name(*r.tmpl);
                    row.stage = r.stage;
                    if (r.closed_form) row.closed_form = to_string(*r.closed_form);
                }
                if (method != Method::analytic) {
                    auto r = solve_certificate_sdp(box, build_orthogonality_graph(box.scenario));
                    const bool s = r.verified && to_double(r.verified_value) > 1e-6;
                    if (method == Method::sdp) row.value = r.verified ? to_string(r.verified_value) : "0";
                    hit = hit || s;
                }
                row.excluded = hit;
            } catch (const std::exception& e) {
                std::lock_guard lk(err_mu);
                if (first_error.empty()) first_error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < std::max(1u, a.jobs); ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (!first_error.empty()) throw std::runtime_error(first_error);

    std::ostringstream csv;
    csv << "spec,method,value,excluded,template,stage,closed_form\n";
    std::size_t excluded = 0;
    for (const auto& r : rows) {
        std::string spec = r.spec;
        std::string quoted;
        for (char ch : spec) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        csv << '"' << quoted << "\"," << r.method << ',' << r.value << ',' << (r.excluded ? 1 : 0) << ',' << r.tmpl
            << ',' << r.stage << ',' << r.closed_form << '\n';
        excluded += r.excluded;
    }
    if (a.out.empty() || a.out == "-")
        std::cout << csv.str();
    else {
        std::ofstream f(a.out);
        if (!f) throw std::runtime_error("cannot write " + a.out);
        f << csv.str();
    }
    json summary = envelope(argv, "faces-sweep:" + std::to_string(a.k) + ":" + std::to_string(a.dim) + ":" +
                                      std::to_string(a.grid) + ":" + std::to_string(a.seed));
    summary["results"] = json{{"rows", rows.size()}, {"excluded", excluded}};
    summary["wall_seconds"] = seconds_since(t0);
    std::cerr << summary.dump() << "\n";
    return kExitOk;
}

// ---- selftest ----

struct SelftestArgs {
    int m = 0;
    std::string model_file, out;
    bool canonical = false;
};

PlanarModel model_from_json(const json& j) {
    try {
        const int m = j.at("m").get<int>();
        auto a = j.at("thetaA").get<std::vector<double>>();
        auto b = j.at("thetaB").get<std::vector<double>>();
        if (a.size() != std::size_t(m) || b.size() != std::size_t(m))
            throw UsageError("model angle lists must have m entries");
        return PlanarModel(a, b);
    } catch (const json::exception& e) {
        throw UsageError(std::string("bad model: ") + e.what());
    }
}

int cmd_selftest(const SelftestArgs& a, const std::vector<std::string>& argv) {
    const auto t0 = std::chrono::steady_clock::now();
    if (a.canonical == !a.model_file.empty()) throw UsageError("give exactly one of --model, --canonical-chained");
    PlanarModel model;
    std::string digest_input;
    if (a.canonical) {
        if (a.m < 2) throw UsageError("--m must be >= 2");
        model = equal_spacing_model(a.m);
        digest_input = "canonical-chained:" + std::to_string(a.m);
    } else {
        digest_input = read_file(a.model_file);
        model = model_from_json(json::parse(digest_input));
        if (a.m != 0 && a.m != model.m) throw UsageError("--m does not match the model");
        // Alice's inputs are put in ascending angle order before the boundary is evaluated.
        std::sort(model.theta_a.begin(), model.theta_a.end());
    }
    const auto E = correlators_from_model(model);
    const auto al = angle_table(E);
    json res{{"m", model.m}, {"thetaA", model.theta_a}, {"thetaB", model.theta_b}};
    res["boundary_residual"] = boundary_residual(al);
    if (model.m == 2) {
        json best;
        double bv = 1e300;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int xi : {1, -1}) {
                    double r = tlm_residual(E, i, j, xi);
                    if (std::abs(r) < bv) {
                        bv = std::abs(r);
                        best = json{{"pivot", {i + 1, j + 1}}, {"xi", xi}, {"residual", r}};
                    }
                }
        res["tlm"] = best;
    }
    const auto w = boundary_weights(al).normalized();
    res["chain_value"] = chain_value(E, w);
    res["classical_chain_max"] = classical_chain_max(w);
    const auto st = verify_self_test_conditions(model);
    res["self_test"] = json{{"z_match", st.z_match}, {"x_match", st.x_match}, {"anticommute_a", st.anti_a},
                            {"anticommute_b", st.anti_b}, {"zz", st.zz},           {"xx", st.xx},
                            {"unitarity", st.unitarity}};
    res["isometry_fidelity"] = swap_isometry_fidelity(model);
    res["pushforward_residual"] = pushforward_residual(model);
    json rep = envelope(argv, digest_input);
    rep["results"] = res;
    rep["wall_seconds"] = seconds_since(t0);
    write_output(a.out, rep.dump(2));
    return kExitOk;
}

// ---- xorgame ----

struct XorArgs {
    int k = 0;
    bool verify_hadamard = false, verify_blocks = false, bias = false;
    std::string out, csv;
};

int cmd_xorgame(const XorArgs& a, const std::vector<std::string>& argv) {
    const auto t0 = std::chrono::steady_clock::now();
    if (a.k < 2 || a.k > kMaxGameK) throw UsageError("--k must lie in [2, 12]");
    const auto g = build_game(a.k);
    json rows = json::array();
    for (std::size_t i = 0; i < g.rows; ++i) {
        json r = json::array();
        for (std::size_t j = 0; j < g.cols; ++j) r.push_back(g(i, j));
        rows.push_back(r);
    }
    json res{{"k", a.k}, {"game", rows}};
    if (a.verify_hadamard) res["diagonal_in_hadamard_basis"] = is_diagonal_in_hadamard_basis(g);
    if (a.verify_blocks) {
        if (a.k < 4) {
            res["block_structure"] = json{{"applicable", false}};
        } else {
            auto b = verify_block_structure(g, a.k);
            res["block_structure"] = json{{"applicable", true}, {"ok", b.ok}, {"depth", b.depth}, {"first_failure", b.where}};
        }
    }
    if (a.bias) {
        res["classical_bias"] = classical_bias(g);
        auto q = solve_elliptope(to_eigen(g));
        res["quantum_bias"] = q.value;
        res["quantum_dual_bound"] = q.dual_bound;
        res["sdp_status"] = sdp_status_name(q.status);
    }
    if (!a.csv.empty()) {
        std::ofstream f(a.csv);
        if (!f) throw std::runtime_error("cannot write " + a.csv);
        for (std::size_t i = 0; i < g.rows; ++i) {
            for (std::size_t j = 0; j < g.cols; ++j) f << (j ? "," : "") << g(i, j);
            f << "\n";
        }
    }
    json rep = envelope(argv, "xorgame:" + std::to_string(a.k));
    rep["results"] = res;
    rep["wall_seconds"] = seconds_since(t0);
    write_output(a.out, rep.dump(2));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-boundary toolkit"};
    app.require_subcommand(1);
    std::vector<std::string> args(argv, argv + argc);

    ExcludeArgs ea;
    auto* ex = app.add_subcommand("exclude", "Decide whether a box is excluded from the quantum set");
    ex->add_option("--box", ea.box_file, "Box JSON file");
    ex->add_option("--pr", ea.pr, "Use the PR box of k outcomes");
    ex->add_option("--face", ea.face_file, "Face spec JSON file");
    ex->add_option("--method", ea.method, "analytic, sdp or both")->check(CLI::IsMember({"analytic", "sdp", "both"}));
    ex->add_option("--tol", ea.tol, "SDP decision tolerance");
    ex->add_option("--out", ea.out, "Report file (stdout when omitted)");

    SweepArgs sa;
    auto* sw = app.add_subcommand("faces-sweep", "Exclude sampled boxes on every neighbor-subset face");
    sw->add_option("--k", sa.k)->required();
    sw->add_option("--dim", sa.dim)->required();
    sw->add_option("--grid", sa.grid, "Samples per neighbor subset");
    sw->add_option("--seed", sa.seed);
    sw->add_option("--jobs", sa.jobs);
    sw->add_option("--method", sa.method)->check(CLI::IsMember({"analytic", "sdp", "both"}));
    sw->add_option("--out", sa.out, "CSV file (stdout when omitted)");

    SelftestArgs ta;
    auto* st = app.add_subcommand("selftest", "Boundary, chained inequality and swap-isometry checks");
    st->add_option("--m", ta.m);
    st->add_option("--model", ta.model_file, "Model JSON {m, thetaA, thetaB}");
    st->add_flag("--canonical-chained", ta.canonical, "Equal-spacing model");
    st->add_option("--out", ta.out);

    XorArgs xa;
    auto* xg = app.add_subcommand("xorgame", "Build and verify the 2^k-input XOR game");
    xg->add_option("--k", xa.k)->required();
    xg->add_flag("--verify-hadamard", xa.verify_hadamard);
    xg->add_flag("--verify-blocks", xa.verify_blocks);
    xg->add_flag("--bias", xa.bias);
    xg->add_option("--out", xa.out);
    xg->add_option("--csv", xa.csv, "Also write the game matrix as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitError;
    }
    try {
        if (*ex) return cmd_exclude(ea, args);
        if (*sw) return cmd_faces_sweep(sa, args);
        if (*st) return cmd_selftest(ta, args);
        if (*xg) return cmd_xorgame(xa, args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

#pragma once

#include "qbell/exclusion.hpp"
#include "qbell/faces.hpp"
#include "qbell/sdp.hpp"

#include <openssl/evp.h>

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace qbell {

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

inline json chain_to_json(const ChainedSequence& ch) {
    std::vector<int> sat;
    for (bool b : ch.saturated) sat.push_back(b ? 1 : 0);
    return json{{"elements", ch.elements}, {"saturated", sat}};
}

template <class T>
json analytic_report_to_json(const AnalyticReport<T>& r) {
    json j{{"excluded", r.excluded}, {"value", scalar_to_json(r.value)}};
    if (r.tmpl) {
        j["template"] = template_name(*r.tmpl);
        j["stage"] = r.stage;
        j["params"] = json{{"k", r.params.k}, {"c_ns", to_string(r.params.c_ns)}, {"epsilon", to_string(r.params.epsilon)}};
        if (*r.tmpl == Template::octagon) {
            j["params"]["g"] = to_string(r.params.g);
            j["params"]["big"] = to_string(r.params.big);
        }
    }
    if (r.closed_form) j["closed_form"] = scalar_to_json(*r.closed_form);
    if (r.chain) j["chain"] = chain_to_json(*r.chain);
    if (r.certificate) j["certificate"] = certificate_to_json(*r.certificate);
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

enum class Method { analytic, sdp, both };

inline Method method_from_name(const std::string& s) {
    if (s == "analytic") return Method::analytic;
    if (s == "sdp") return Method::sdp;
    if (s == "both") return Method::both;
    throw std::invalid_argument("unknown method: " + s);
}

inline std::string method_name(Method m) {
    switch (m) {
        case Method::analytic: return "analytic";
        case Method::sdp: return "sdp";
        case Method::both: return "both";
    }
    return "?";
}

struct ExcludeOutcome {
    bool excluded = false;
    bool decided = true;
    json report;
};

// Local by LP over deterministic vertices; nullopt when the scenario is too large to enumerate.
template <class T>
std::optional<bool> lp_local(const Box<T>& box) {
    const auto& s = box.scenario;
    const double count = std::pow(double(s.ka), s.ma) * std::pow(double(s.kb), s.mb);
    if (count > 4096) return std::nullopt;
    return local_membership(box, enumerate_local_deterministic<T>(s)).inside;
}

// An analytic miss is decided (no template applies). An SDP optimum in [0, tol] is undecided unless an
// LP shows the box is local.
template <class T>
ExcludeOutcome run_exclude(const Box<T>& box, Method method, double tol = 1e-6, const AnalyticOptions& aopt = {}) {
    ExcludeOutcome out;
    out.report = json{{"method", method_name(method)}, {"mode", mode_name<T>()}};
    bool analytic_hit = false, sdp_hit = false, sdp_decided = true;
    if (method != Method::sdp) {
        auto r = exclude_by_analytic(box, aopt);
        analytic_hit = r.excluded;
        out.report["analytic"] = analytic_report_to_json(r);
        out.report["value"] = scalar_to_json(r.value);
        if (r.certificate) {
            out.report["certificate"] = out.report["analytic"]["certificate"];
            out.report["analytic"].erase("certificate");
        }
    }
    if (method != Method::analytic) {
        auto g = build_orthogonality_graph(box.scenario);
        auto r = solve_certificate_sdp(box, g);
        json j{{"solver_value", r.sdp.value},
               {"status", sdp_status_name(r.sdp.status)},
               {"iterations", r.sdp.iterations},
               {"verified", r.verified},
               {"min_eigenvalue", r.sdp.min_eigenvalue},
               {"pattern_violation", r.sdp.pattern_violation},
               {"trace_slack", r.sdp.trace_slack}};
        if (r.verified) {
            j["verified_value"] = scalar_to_json(r.verified_value);
            sdp_hit = to_double(r.verified_value) > tol;
            if (sdp_hit && r.certificate) j["certificate"] = certificate_to_json(*r.certificate);
        }
        if (!sdp_hit) {
            auto local = lp_local(box);
            if (local) j["lp_local"] = *local;
            sdp_decided = local.value_or(false);
        }
        out.report["sdp"] = j;
        if (method == Method::sdp) out.report["value"] = r.verified ? scalar_to_json(r.verified_value) : json(0);
    }
    if (method == Method::both && analytic_hit != sdp_hit) out.report["routes_disagree"] = true;
    out.excluded = analytic_hit || sdp_hit;
    out.decided = out.excluded || method == Method::analytic || sdp_decided;
    out.report["excluded"] = out.excluded;
    out.report["decided"] = out.decided;
    return out;
}

// c_NS uniform on {50..950}/1000, the remaining mass split by uniform integer weights.
template <class URBG>
FaceSpec<Rational> sample_face_spec(int k, const std::vector<int>& ids, URBG& rng) {
    FaceSpec<Rational> f;
    f.k = k;
    f.neighbors = ids;
    std::uniform_int_distribution<long> cdist(50, 950), gdist(1, 1000000);
    const Rational c = make_rational(cdist(rng), 1000);
    if (ids.empty()) {
        f.weights = {Rational(1)};
        return f;
    }
    std::vector<long> g;
    long tot = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        g.push_back(gdist(rng));
        tot += g.back();
    }
    f.weights.push_back(c);
    for (long v : g) f.weights.push_back((1 - c) * make_rational(v, tot));
    return f;
}

// All size-d subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> subsets_of_size(int n, int d) {
    std::vector<std::vector<int>> out;
    if (d < 0 || d > n) return out;
    std::vector<int> cur(static_cast<std::size_t>(d), 0);
    for (int i = 0; i < d; ++i) cur[std::size_t(i)] = i;
    while (true) {
        out.push_back(cur);
        int i = d - 1;
        while (i >= 0 && cur[std::size_t(i)] == n - d + i) --i;
        if (i < 0) break;
        ++cur[std::size_t(i)];
        for (int j = i + 1; j < d; ++j) cur[std::size_t(j)] = cur[std::size_t(j - 1)] + 1;
    }
    return out;
}

}  // namespace qbell

#pragma once

#include "qbell/box.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qbell {

class OrthogonalityGraph {
public:
    OrthogonalityGraph() = default;
    explicit OrthogonalityGraph(const BellScenario& s) : scenario_(s), n_(s.events()), adj_(n_ * n_, 0) {
        for (std::size_t u = 0; u < n_; ++u) {
            auto eu = EventIndex::from_flat(s, u);
            for (std::size_t v = 0; v < n_; ++v) {
                if (u == v) continue;
                adj_[u * n_ + v] = locally_orthogonal(eu, EventIndex::from_flat(s, v)) ? 1 : 0;
            }
        }
    }
    // Arbitrary symmetric adjacency, for tests on abstract graphs.
    static OrthogonalityGraph from_adjacency(std::size_t n, const std::vector<std::uint8_t>& adj) {
        if (adj.size() != n * n) throw std::invalid_argument("adjacency size mismatch");
        OrthogonalityGraph g;
        g.n_ = n;
        g.adj_ = adj;
        for (std::size_t i = 0; i < n; ++i) {
            if (g.adj_[i * n + i]) throw std::invalid_argument("self-loop");
            for (std::size_t j = 0; j < n; ++j)
                if (g.adj_[i * n + j] != g.adj_[j * n + i]) throw std::invalid_argument("asymmetric adjacency");
        }
        return g;
    }

    const BellScenario& scenario() const { return scenario_; }
    std::size_t size() const { return n_; }
    bool adjacent(std::size_t u, std::size_t v) const { return adj_[u * n_ + v] != 0; }
    std::size_t degree(std::size_t u) const {
        std::size_t d = 0;
        for (std::size_t v = 0; v < n_; ++v) d += adj_[u * n_ + v];
        return d;
    }

private:
    BellScenario scenario_{};
    std::size_t n_ = 0;
    std::vector<std::uint8_t> adj_;
};

inline OrthogonalityGraph build_orthogonality_graph(const BellScenario& s) { return OrthogonalityGraph(s); }

// Bron-Kerbosch with Tomita pivoting on 64-bit vertex masks.
inline std::vector<std::vector<std::size_t>> maximal_cliques(const OrthogonalityGraph& g, std::size_t cap = 64) {
    const std::size_t n = g.size();
    if (n > cap || n > 64) throw std::length_error("clique enumeration cap exceeded");
    using Mask = std::uint64_t;
    std::vector<Mask> nb(n, 0);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            if (g.adjacent(u, v)) nb[u] |= Mask(1) << v;
    std::vector<std::vector<std::size_t>> out;
    auto rec = [&](auto&& self, Mask r, Mask p, Mask x) -> void {
        if (!p && !x) {
            std::vector<std::size_t> c;
            for (Mask m = r; m; m &= m - 1) c.push_back(std::size_t(std::countr_zero(m)));
            out.push_back(std::move(c));
            return;
        }
        std::size_t pivot = 0;
        int best = -1;
        for (Mask m = p | x; m; m &= m - 1) {
            auto u = std::size_t(std::countr_zero(m));
            int c = std::popcount(p & nb[u]);
            if (c > best) best = c, pivot = u;
        }
        for (Mask m = p & ~nb[pivot]; m; m &= m - 1) {
            auto v = std::size_t(std::countr_zero(m));
            Mask bit = Mask(1) << v;
            self(self, r | bit, p & nb[v], x & nb[v]);
            p &= ~bit;
            x |= bit;
        }
    };
    Mask all = n == 64 ? ~Mask(0) : ((Mask(1) << n) - 1);
    rec(rec, 0, all, 0);
    return out;
}

}  // namespace qbell

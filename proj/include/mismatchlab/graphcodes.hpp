#pragma once
// Graph-based code constructions. Identity codes come from complete
// bipartite subgraphs of the distinct-value graph (one edge per distinct
// channel output); equality codes come from induced matchings of the graph
// whose edges are the channel input pairs mapped into a sampled output
// subset. Strong edge coloring supplies the constructive matching bound
// m / (2 * Delta^2).

#include <mismatchlab/core.hpp>
#include <mismatchlab/rng.hpp>

#include <boost/dynamic_bitset.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace mismatchlab {

using Bitset = boost::dynamic_bitset<>;

struct BipartiteGraph {
    int nL = 0, nR = 0;
    std::vector<Bitset> adj;    // nL rows of nR bits
    std::vector<Bitset> adj_t;  // transpose, kept in sync
    std::map<std::pair<int, int>, Symbol> edge_labels;  // optional annotations

    BipartiteGraph() = default;
    BipartiteGraph(int l, int r) : nL(l), nR(r), adj(std::size_t(l), Bitset(std::size_t(r))),
                                   adj_t(std::size_t(r), Bitset(std::size_t(l))) {
        if (l < 1 || r < 1) throw std::invalid_argument("BipartiteGraph: vertex counts must be positive");
    }

    void add_edge(int l, int r) {
        adj[std::size_t(l)].set(std::size_t(r));
        adj_t[std::size_t(r)].set(std::size_t(l));
    }
    bool has_edge(int l, int r) const { return adj[std::size_t(l)].test(std::size_t(r)); }

    std::size_t edge_count() const {
        std::size_t m = 0;
        for (const auto& row : adj) m += row.count();
        return m;
    }
    std::size_t max_degree_left() const {
        std::size_t d = 0;
        for (const auto& row : adj) d = std::max(d, row.count());
        return d;
    }
    std::size_t max_degree_right() const {
        std::size_t d = 0;
        for (const auto& col : adj_t) d = std::max(d, col.count());
        return d;
    }
    std::size_t max_degree() const { return std::max(max_degree_left(), max_degree_right()); }

    // Lexicographic (left, right) order; the canonical edge order everywhere.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> e;
        e.reserve(edge_count());
        for (int l = 0; l < nL; ++l)
            for (auto r = adj[std::size_t(l)].find_first(); r != Bitset::npos;
                 r = adj[std::size_t(l)].find_next(r))
                e.emplace_back(l, int(r));
        return e;
    }
};

struct InducedMatching {
    std::vector<std::pair<int, int>> edges;
};

// No shared endpoints and no host edge between endpoints of distinct
// matching edges.
inline bool is_induced_matching(const BipartiteGraph& b, const std::vector<std::pair<int, int>>& edges) {
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!b.has_edge(edges[i].first, edges[i].second)) return false;
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            const auto [l1, r1] = edges[i];
            const auto [l2, r2] = edges[j];
            if (l1 == l2 || r1 == r2) return false;
            if (b.has_edge(l1, r2) || b.has_edge(l2, r1)) return false;
        }
    }
    return true;
}

// One edge per distinct output value, placed at the value's row-major first
// occurrence; edge labels record the values.
inline BipartiteGraph distinct_value_graph(const ChannelFunction& g) {
    BipartiteGraph b(g.X1, g.X2);
    std::unordered_set<Symbol> seen;
    for (int x1 = 0; x1 < g.X1; ++x1)
        for (int x2 = 0; x2 < g.X2; ++x2) {
            const Symbol y = g.at(x1, x2);
            if (seen.insert(y).second) {
                b.add_edge(x1, x2);
                b.edge_labels[{x1, x2}] = y;
            }
        }
    return b;
}

// Kővári–Sós–Turán style bound: more edges than this force a K_{b,b}.
inline double zarankiewicz_upper_bound(int b, int n) {
    if (b < 1 || b > n) throw std::domain_error("zarankiewicz_upper_bound: need 1 <= b <= n");
    const double bd = b, nd = n;
    return std::pow(bd - 1, 1.0 / bd) * (nd - bd + 1) * std::pow(nd, 1.0 - 1.0 / bd) + (bd - 1) * nd + 1;
}

enum class SearchOutcome { found, absent, unknown };
enum class SubgraphMode { exact, greedy };

struct BicliqueResult {
    SearchOutcome outcome = SearchOutcome::absent;
    std::vector<int> left, right;  // sorted, size b when found
    std::uint64_t nodes = 0;
};

namespace detail {

struct BicliqueSearch {
    const BipartiteGraph& b;
    int target;
    std::uint64_t budget;
    std::uint64_t nodes = 0;
    bool exhausted = false;
    std::vector<int> order;  // left vertices, descending degree
    std::vector<int> chosen;

    BicliqueSearch(const BipartiteGraph& b_, int target_, std::uint64_t budget_)
        : b(b_), target(target_), budget(budget_) {
        order.resize(std::size_t(b.nL));
        for (int i = 0; i < b.nL; ++i) order[std::size_t(i)] = i;
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
            return b.adj[std::size_t(x)].count() > b.adj[std::size_t(y)].count();
        });
    }

    bool dfs(int idx, const Bitset& common, BicliqueResult& out) {
        if (int(chosen.size()) == target) {
            out.left = chosen;
            std::sort(out.left.begin(), out.left.end());
            for (auto r = common.find_first(); r != Bitset::npos && int(out.right.size()) < target;
                 r = common.find_next(r))
                out.right.push_back(int(r));
            return true;
        }
        for (int i = idx; i < b.nL; ++i) {
            if (b.nL - i < target - int(chosen.size())) break;
            if (++nodes > budget) { exhausted = true; return false; }
            Bitset next = common & b.adj[std::size_t(order[std::size_t(i)])];
            if (int(next.count()) < target) continue;
            chosen.push_back(order[std::size_t(i)]);
            if (dfs(i + 1, next, out)) return true;
            chosen.pop_back();
            if (exhausted) return false;
        }
        return false;
    }
};

}  // namespace detail

// Searches for a complete b x b bipartite subgraph. Exact mode is a
// branch-and-bound over left-vertex subsets (complete within budget); greedy
// keeps extending by the left vertex preserving the largest common
// neighborhood and may miss.
inline BicliqueResult find_complete_bipartite(const BipartiteGraph& b, int target, SubgraphMode mode,
                                              std::uint64_t budget = 10'000'000) {
    if (target < 1 || target > std::min(b.nL, b.nR))
        throw std::invalid_argument("find_complete_bipartite: b exceeds a vertex class");
    BicliqueResult out;
    if (mode == SubgraphMode::exact) {
        detail::BicliqueSearch search(b, target, budget);
        Bitset all(std::size_t(b.nR));
        all.set();
        const bool ok = search.dfs(0, all, out);
        out.nodes = search.nodes;
        out.outcome = ok ? SearchOutcome::found
                         : (search.exhausted ? SearchOutcome::unknown : SearchOutcome::absent);
        return out;
    }
    Bitset common(std::size_t(b.nR));
    common.set();
    std::vector<char> used(std::size_t(b.nL), 0);
    std::vector<int> chosen;
    for (int round = 0; round < target; ++round) {
        int best = -1;
        std::size_t best_count = 0;
        for (int l = 0; l < b.nL; ++l) {
            if (used[std::size_t(l)]) continue;
            ++out.nodes;
            const std::size_t c = (common & b.adj[std::size_t(l)]).count();
            if (best == -1 || c > best_count) { best = l; best_count = c; }
        }
        used[std::size_t(best)] = 1;
        chosen.push_back(best);
        common &= b.adj[std::size_t(best)];
    }
    if (int(common.count()) >= target) {
        out.outcome = SearchOutcome::found;
        out.left = chosen;
        std::sort(out.left.begin(), out.left.end());
        for (auto r = common.find_first(); r != Bitset::npos && int(out.right.size()) < target;
             r = common.find_next(r))
            out.right.push_back(int(r));
    }
    return out;
}

struct CodeResult {
    SearchOutcome outcome = SearchOutcome::absent;
    std::optional<Code> code;
    std::uint64_t nodes = 0;
};

// Identity code for U messages per user: all U^2 outputs of the chosen
// biclique are distinct, so the decoder recovers the message pair index
// u1 * U + u2 directly.
inline CodeResult build_identity_code(const ChannelFunction& g, int U, SubgraphMode mode,
                                      std::uint64_t budget = 10'000'000) {
    if (U < 1 || U > std::min(g.X1, g.X2))
        throw std::invalid_argument("build_identity_code: U exceeds an input alphabet");
    if (g.Y > kMaxDecoderSize) throw std::invalid_argument("build_identity_code: output alphabet too large");
    const BipartiteGraph b = distinct_value_graph(g);
    BicliqueResult r = find_complete_bipartite(b, U, mode, budget);
    CodeResult out;
    out.outcome = r.outcome;
    out.nodes = r.nodes;
    if (r.outcome != SearchOutcome::found) return out;
    Code code{r.left, r.right, std::vector<int>(std::size_t(g.Y), 0)};
    for (int u1 = 0; u1 < U; ++u1)
        for (int u2 = 0; u2 < U; ++u2)
            code.decoder[std::size_t(g.at(code.f1[std::size_t(u1)], code.f2[std::size_t(u2)]))] =
                u1 * U + u2;
    out.code = std::move(code);
    return out;
}

struct EqualityGraph {
    BipartiteGraph graph;
    std::vector<Symbol> subset;  // sorted selected output values
    std::int64_t k = 0;
};

// Edge (x1, x2) iff g(x1, x2) lands in the given output subset.
inline BipartiteGraph equality_graph_from_subset(const ChannelFunction& g,
                                                 const std::vector<Symbol>& subset) {
    std::unordered_set<Symbol> sel(subset.begin(), subset.end());
    BipartiteGraph b(g.X1, g.X2);
    for (int x1 = 0; x1 < g.X1; ++x1)
        for (int x2 = 0; x2 < g.X2; ++x2)
            if (sel.count(g.at(x1, x2))) b.add_edge(x1, x2);
    return b;
}

// k = floor(Y / (16 U)) and a uniform k-subset of output values drawn with
// Floyd's algorithm from the dedicated seed.
inline EqualityGraph equality_graph(const ChannelFunction& g, int U, std::uint64_t subset_seed) {
    if (U < 1) throw std::invalid_argument("equality_graph: U must be positive");
    const std::int64_t k = g.Y / (16 * std::int64_t(U));
    if (k < 1) throw std::invalid_argument("equality_graph: output alphabet too small, need Y >= 16U");
    Engine eng = make_engine(subset_seed);
    std::unordered_set<Symbol> sel;
    for (std::int64_t j = g.Y - k; j < g.Y; ++j) {
        const Symbol t = Symbol(uniform_below(eng, std::uint64_t(j) + 1));
        if (!sel.insert(t).second) sel.insert(Symbol(j));
    }
    std::vector<Symbol> subset(sel.begin(), sel.end());
    std::sort(subset.begin(), subset.end());
    return {equality_graph_from_subset(g, subset), std::move(subset), k};
}

struct StrongColoring {
    std::vector<std::pair<int, int>> edges;  // lexicographic order
    std::vector<int> colors;                 // per edge
    int num_colors = 0;
};

// Greedy strong edge coloring in lexicographic edge order: each edge takes
// the smallest color unused by edges within distance one (sharing an
// endpoint or joined through a host edge). Uses at most 2 * Delta^2 colors.
inline StrongColoring strong_edge_coloring(const BipartiteGraph& b) {
    StrongColoring sc;
    sc.edges = b.edges();
    if (sc.edges.empty()) throw std::invalid_argument("strong_edge_coloring: graph has no edges");
    sc.colors.assign(sc.edges.size(), -1);
    std::vector<std::vector<int>> left_inc(std::size_t(b.nL)), right_inc(std::size_t(b.nR));
    const std::size_t max_colors = 2 * b.max_degree() * b.max_degree();
    std::vector<std::uint64_t> stamp(max_colors + 1, 0);
    std::uint64_t epoch = 0;
    for (std::size_t e = 0; e < sc.edges.size(); ++e) {
        const auto [l, r] = sc.edges[e];
        ++epoch;
        // Colored edges at distance one: incident to a neighbor of l on the
        // right, or to a neighbor of r on the left. This covers shared
        // endpoints too (l is a neighbor of r and vice versa).
        const auto& nl = b.adj[std::size_t(l)];
        for (auto r2 = nl.find_first(); r2 != Bitset::npos; r2 = nl.find_next(r2))
            for (int e2 : right_inc[r2])
                if (std::size_t(sc.colors[std::size_t(e2)]) <= max_colors)
                    stamp[std::size_t(sc.colors[std::size_t(e2)])] = epoch;
        const auto& nr = b.adj_t[std::size_t(r)];
        for (auto l2 = nr.find_first(); l2 != Bitset::npos; l2 = nr.find_next(l2))
            for (int e2 : left_inc[l2])
                if (std::size_t(sc.colors[std::size_t(e2)]) <= max_colors)
                    stamp[std::size_t(sc.colors[std::size_t(e2)])] = epoch;
        int color = 0;
        while (stamp[std::size_t(color)] == epoch) ++color;
        sc.colors[e] = color;
        sc.num_colors = std::max(sc.num_colors, color + 1);
        left_inc[std::size_t(l)].push_back(int(e));
        right_inc[std::size_t(r)].push_back(int(e));
    }
    if (std::size_t(sc.num_colors) > max_colors)
        throw std::logic_error("strong_edge_coloring: color bound violated");
    return sc;
}

// Largest color class of the greedy strong coloring; ties take the smallest
// color. Size is at least ceil(m / (2 Delta^2)).
inline InducedMatching strong_coloring_matching(const BipartiteGraph& b) {
    const StrongColoring sc = strong_edge_coloring(b);
    std::vector<std::size_t> class_size(std::size_t(sc.num_colors), 0);
    for (int c : sc.colors) ++class_size[std::size_t(c)];
    int best = 0;
    for (int c = 1; c < sc.num_colors; ++c)
        if (class_size[std::size_t(c)] > class_size[std::size_t(best)]) best = c;
    InducedMatching m;
    for (std::size_t e = 0; e < sc.edges.size(); ++e)
        if (sc.colors[e] == best) m.edges.push_back(sc.edges[e]);
    return m;
}

// Exhaustive maximum induced matching via branch-and-bound over the edge
// list; edges are pairwise compatible iff disjoint and not joined by a host
// edge. Only for small graphs (m <= 24).
inline InducedMatching max_induced_matching_exact(const BipartiteGraph& b,
                                                  std::uint64_t budget = 50'000'000) {
    const auto edges = b.edges();
    const std::size_t m = edges.size();
    if (m > 24) throw std::invalid_argument("max_induced_matching_exact: too many edges (limit 24)");
    std::vector<std::uint32_t> conflict(m, 0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto [l1, r1] = edges[i];
            const auto [l2, r2] = edges[j];
            const bool clash = l1 == l2 || r1 == r2 || b.has_edge(l1, r2) || b.has_edge(l2, r1);
            if (clash) {
                conflict[i] |= std::uint32_t(1) << j;
                conflict[j] |= std::uint32_t(1) << i;
            }
        }
    std::uint64_t nodes = 0;
    std::vector<std::size_t> best, cur;
    auto dfs = [&](auto&& self, std::size_t idx, std::uint32_t banned) -> void {
        if (++nodes > budget) throw BudgetExhausted("max_induced_matching_exact: node budget exhausted");
        if (cur.size() > best.size()) best = cur;
        if (cur.size() + (m - idx) <= best.size()) return;
        for (std::size_t i = idx; i < m; ++i) {
            if (banned & (std::uint32_t(1) << i)) continue;
            cur.push_back(i);
            self(self, i + 1, banned | conflict[i]);
            cur.pop_back();
            if (cur.size() + (m - i - 1) <= best.size()) return;
        }
    };
    dfs(dfs, 0, 0);
    InducedMatching out;
    for (std::size_t i : best) out.edges.push_back(edges[i]);
    return out;
}

enum class MatchingMode { greedy, exact };

// Equality code from an induced matching of size >= U: message u goes to the
// endpoints of the u-th matching edge; the decoder answers 1 iff the output
// value lies in the sampled subset. Matching edges all map into the subset;
// induction guarantees cross pairs map outside it.
inline CodeResult build_equality_code_with_subset(const ChannelFunction& g, int U,
                                                  const std::vector<Symbol>& subset, MatchingMode mode,
                                                  std::uint64_t budget = 50'000'000) {
    if (U < 1) throw std::invalid_argument("build_equality_code: U must be positive");
    if (g.Y > kMaxDecoderSize) throw std::invalid_argument("build_equality_code: output alphabet too large");
    const BipartiteGraph b = equality_graph_from_subset(g, subset);
    CodeResult out;
    if (b.edge_count() == 0) return out;
    const InducedMatching matching =
        mode == MatchingMode::greedy ? strong_coloring_matching(b) : max_induced_matching_exact(b, budget);
    if (int(matching.edges.size()) < U) return out;  // construction failed, not proof of infeasibility
    std::unordered_set<Symbol> sel(subset.begin(), subset.end());
    Code code;
    for (int u = 0; u < U; ++u) {
        code.f1.push_back(matching.edges[std::size_t(u)].first);
        code.f2.push_back(matching.edges[std::size_t(u)].second);
    }
    code.decoder.assign(std::size_t(g.Y), 0);
    for (Symbol y = 0; y < g.Y; ++y)
        if (sel.count(y)) code.decoder[std::size_t(y)] = 1;
    out.outcome = SearchOutcome::found;
    out.code = std::move(code);
    return out;
}

inline CodeResult build_equality_code(const ChannelFunction& g, int U, std::uint64_t subset_seed,
                                      MatchingMode mode, std::uint64_t budget = 50'000'000) {
    const EqualityGraph eg = equality_graph(g, U, subset_seed);
    return build_equality_code_with_subset(g, U, eg.subset, mode, budget);
}

// Edge list as "left,right[,label]" rows with a header.
inline std::string edge_csv(const BipartiteGraph& b) {
    const bool labeled = !b.edge_labels.empty();
    std::string out = labeled ? "left,right,label\n" : "left,right\n";
    for (const auto& [l, r] : b.edges()) {
        out += std::to_string(l) + "," + std::to_string(r);
        if (labeled) {
            const auto it = b.edge_labels.find({l, r});
            if (it != b.edge_labels.end()) out += "," + std::to_string(it->second);
        }
        out += "\n";
    }
    return out;
}

}  // namespace mismatchlab

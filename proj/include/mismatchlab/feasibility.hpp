#pragma once
// Exact decision of zero-error computability of a target over a given
// channel: does some choice of encoders make the induced output matrix
// decodable, i.e. no output symbol is shared by message pairs with
// different target values?
//
// Two search modes over encoder assignments:
//   * naive: enumerate every (f1, f2) pair in lexicographic order;
//   * pruned: depth-first over injective encoders with incremental
//     consistency checks and a most-constrained column ordering.
// For a normalized target (no duplicate rows or columns) the restriction to
// injective encoders loses nothing: two messages sharing an input row would
// force an output collision in every column, and normalization guarantees a
// column where their target values differ. The two modes therefore return
// the same verdict; the test suite enforces this on an instance corpus.
//
// Both modes count explored nodes against a budget and return `unknown`
// when the budget runs out before the decision is settled.

#include <mismatchlab/core.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mismatchlab {

enum class SearchMode { pruned, naive };
enum class Feasibility { feasible, infeasible, unknown };

struct FeasibilityVerdict {
    Feasibility status = Feasibility::unknown;
    std::optional<Code> code;   // witness when feasible
    std::uint64_t nodes = 0;    // encoder assignments examined
    SearchMode mode = SearchMode::pruned;
};

inline constexpr std::uint64_t kDefaultSearchBudget = 20'000'000;

namespace detail {

// Output symbol -> required target value, with O(1) epoch reset and an undo
// trail for backtracking.
struct OutputBinding {
    std::vector<std::pair<std::uint64_t, int>> slot;
    std::uint64_t epoch = 1;
    std::vector<Symbol> trail;

    explicit OutputBinding(Symbol y) : slot(std::size_t(y), {0, 0}) {}
    void reset() { ++epoch; trail.clear(); }
    // -1 conflict, 0 newly bound (recorded on the trail), 1 already consistent
    int bind(Symbol y, int w) {
        auto& s = slot[std::size_t(y)];
        if (s.first != epoch) { s = {epoch, w}; trail.push_back(y); return 0; }
        return s.second == w ? 1 : -1;
    }
    void unwind(std::size_t mark) {
        while (trail.size() > mark) { slot[std::size_t(trail.back())].first = 0; trail.pop_back(); }
    }
    std::optional<int> lookup(Symbol y) const {
        const auto& s = slot[std::size_t(y)];
        if (s.first != epoch) return std::nullopt;
        return s.second;
    }
};

struct SearchContext {
    const TargetFunction& a;
    const ChannelFunction& g;
    std::uint64_t budget;
    std::uint64_t nodes = 0;
    bool exhausted = false;
    OutputBinding table;
    std::vector<int> f1, f2;

    SearchContext(const TargetFunction& a_, const ChannelFunction& g_, std::uint64_t budget_)
        : a(a_), g(g_), budget(budget_), table(g_.Y), f1(a_.U1, -1), f2(a_.U2, -1) {}

    bool tick() {
        if (++nodes > budget) { exhausted = true; return false; }
        return true;
    }

    Code make_code() const {
        Code code{f1, f2, std::vector<int>(std::size_t(g.Y), 0)};
        for (int u1 = 0; u1 < a.U1; ++u1)
            for (int u2 = 0; u2 < a.U2; ++u2)
                code.decoder[std::size_t(g.at(f1[u1], f2[u2]))] = a.at(u1, u2);
        return code;
    }
};

// Depth-first assignment of f1 rows then f2 columns. Rows are assigned
// freely (conflicts only materialize once a column exists); each column
// candidate is checked against all bound outputs before descending.
// Columns pick the candidate ordering by how constrained each input is.
inline bool pruned_dfs(SearchContext& ctx, int pos, std::vector<char>& used1, std::vector<char>& used2,
                       std::optional<Code>& out) {
    const int U1 = ctx.a.U1, U2 = ctx.a.U2;
    if (pos == U1 + U2) {
        out = ctx.make_code();
        return true;
    }
    if (pos < U1) {
        for (int x = 0; x < ctx.g.X1; ++x) {
            if (used1[std::size_t(x)]) continue;
            if (!ctx.tick()) return false;
            used1[std::size_t(x)] = 1;
            ctx.f1[std::size_t(pos)] = x;
            if (pruned_dfs(ctx, pos + 1, used1, used2, out)) return true;
            used1[std::size_t(x)] = 0;
            if (ctx.exhausted) return false;
        }
        return false;
    }
    const int u2 = pos - U1;
    // Candidate columns sorted by descending count of already-bound outputs
    // they touch (most constrained first), ties by input index.
    std::vector<std::pair<int, int>> cand;
    cand.reserve(std::size_t(ctx.g.X2));
    for (int x = 0; x < ctx.g.X2; ++x) {
        if (used2[std::size_t(x)]) continue;
        int bound = 0;
        for (int u1 = 0; u1 < U1; ++u1)
            if (ctx.table.lookup(ctx.g.at(ctx.f1[std::size_t(u1)], x))) ++bound;
        cand.emplace_back(-bound, x);
    }
    std::sort(cand.begin(), cand.end());
    for (auto [neg, x] : cand) {
        (void)neg;
        if (!ctx.tick()) return false;
        const std::size_t mark = ctx.table.trail.size();
        bool ok = true;
        for (int u1 = 0; u1 < U1 && ok; ++u1)
            ok = ctx.table.bind(ctx.g.at(ctx.f1[std::size_t(u1)], x), ctx.a.at(u1, u2)) >= 0;
        if (ok) {
            used2[std::size_t(x)] = 1;
            ctx.f2[std::size_t(u2)] = x;
            if (pruned_dfs(ctx, pos + 1, used1, used2, out)) return true;
            used2[std::size_t(x)] = 0;
        }
        ctx.table.unwind(mark);
        if (ctx.exhausted) return false;
    }
    return false;
}

inline FeasibilityVerdict naive_search(const TargetFunction& a, const ChannelFunction& g,
                                       std::uint64_t budget) {
    SearchContext ctx(a, g, budget);
    const int U1 = a.U1, U2 = a.U2;
    // Odometers over all encoder maps, most significant digit first.
    std::vector<int> f1(std::size_t(U1), 0);
    for (;;) {
        std::vector<int> f2(std::size_t(U2), 0);
        for (;;) {
            if (!ctx.tick())
                return {Feasibility::unknown, std::nullopt, ctx.nodes, SearchMode::naive};
            ctx.table.reset();
            bool ok = true;
            for (int u1 = 0; u1 < U1 && ok; ++u1)
                for (int u2 = 0; u2 < U2 && ok; ++u2)
                    ok = ctx.table.bind(g.at(f1[std::size_t(u1)], f2[std::size_t(u2)]), a.at(u1, u2)) >= 0;
            if (ok) {
                ctx.f1 = f1;
                ctx.f2 = f2;
                return {Feasibility::feasible, ctx.make_code(), ctx.nodes, SearchMode::naive};
            }
            int i = U2 - 1;
            while (i >= 0 && f2[std::size_t(i)] == g.X2 - 1) f2[std::size_t(i--)] = 0;
            if (i < 0) break;
            ++f2[std::size_t(i)];
        }
        int i = U1 - 1;
        while (i >= 0 && f1[std::size_t(i)] == g.X1 - 1) f1[std::size_t(i--)] = 0;
        if (i < 0) break;
        ++f1[std::size_t(i)];
    }
    return {Feasibility::infeasible, std::nullopt, ctx.nodes, SearchMode::naive};
}

}  // namespace detail

// Decides whether some zero-error code exists for (a, g). Requires the
// message sets to fit into the input alphabets. The witness code, when
// found, decodes unreachable outputs to value 0.
inline FeasibilityVerdict zero_feasible_search(const TargetFunction& a, const ChannelFunction& g,
                                               SearchMode mode = SearchMode::pruned,
                                               std::uint64_t budget = kDefaultSearchBudget) {
    if (a.U1 > g.X1 || a.U2 > g.X2)
        throw std::invalid_argument("zero_feasible_search: message set larger than input alphabet");
    if (g.Y > kMaxDecoderSize)
        throw std::invalid_argument("zero_feasible_search: output alphabet too large");
    if (!is_normalized(a))
        throw std::invalid_argument("zero_feasible_search: target must be normalized (no duplicate rows/columns)");
    if (mode == SearchMode::naive) return detail::naive_search(a, g, budget);

    detail::SearchContext ctx(a, g, budget);
    std::vector<char> used1(std::size_t(g.X1), 0), used2(std::size_t(g.X2), 0);
    std::optional<Code> code;
    const bool found = detail::pruned_dfs(ctx, 0, used1, used2, code);
    if (found) return {Feasibility::feasible, std::move(code), ctx.nodes, SearchMode::pruned};
    if (ctx.exhausted) return {Feasibility::unknown, std::nullopt, ctx.nodes, SearchMode::pruned};
    return {Feasibility::infeasible, std::nullopt, ctx.nodes, SearchMode::pruned};
}

// True when the code's exact error probability is at most delta.
inline bool check_code(const TargetFunction& a, const ChannelFunction& g, const Code& code,
                       const Rational& delta = Rational(0)) {
    return error_probability(a, g, code) <= delta;
}

// The function a code actually computes, as a target over the encoders'
// effective ranges. map1/map2 send original messages to rows/columns of the
// extracted function; entries come from decoding the channel output.
struct ApproxFunction {
    int V1 = 0, V2 = 0, W = 0;
    std::vector<int> entries;  // row-major V1 x V2
    std::vector<int> map1, map2;
    Rational delta_achieved;

    int at(int v1, int v2) const { return entries[std::size_t(v1) * V2 + v2]; }
};

inline ApproxFunction extract_delta_approximation(const TargetFunction& a, const ChannelFunction& g,
                                                  const Code& code) {
    validate_code_shape(a, g, code);
    auto compress = [](const std::vector<int>& f, std::vector<int>& range, std::vector<int>& map) {
        range = f;
        std::sort(range.begin(), range.end());
        range.erase(std::unique(range.begin(), range.end()), range.end());
        map.resize(f.size());
        for (std::size_t i = 0; i < f.size(); ++i)
            map[i] = int(std::lower_bound(range.begin(), range.end(), f[i]) - range.begin());
    };
    std::vector<int> r1, r2;
    ApproxFunction out;
    compress(code.f1, r1, out.map1);
    compress(code.f2, r2, out.map2);
    out.V1 = int(r1.size());
    out.V2 = int(r2.size());
    out.W = a.W;
    out.entries.resize(std::size_t(out.V1) * out.V2);
    for (int v1 = 0; v1 < out.V1; ++v1)
        for (int v2 = 0; v2 < out.V2; ++v2)
            out.entries[std::size_t(v1) * out.V2 + v2] =
                code.decoder[std::size_t(g.at(r1[std::size_t(v1)], r2[std::size_t(v2)]))];
    out.delta_achieved = error_probability(a, g, code);
    return out;
}

}  // namespace mismatchlab

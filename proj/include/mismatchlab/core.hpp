#pragma once
// Core finite objects: target functions a : U1 x U2 -> W, deterministic
// two-user channels g : X1 x X2 -> Y, block codes (two encoders plus a
// decoder), memoryless channel extension, exact error probability, and the
// balanced-partition test.
//
// Conventions used throughout the library:
//   * matrices are stored row-major, user/sender 1 indexes rows;
//   * multi-use input and output words are big-endian digit strings, e.g.
//     for two uses of a binary channel the word 2 means digits (1, 0);
//   * probabilities that feed decisions are exact rationals.

#include <mismatchlab/rational.hpp>
#include <mismatchlab/rng.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mismatchlab {

using Symbol = std::int64_t;

// Allocation guards; anything larger is rejected rather than attempted.
inline constexpr std::int64_t kMaxChannelCells = std::int64_t{1} << 24;
inline constexpr std::int64_t kMaxDecoderSize = std::int64_t{1} << 26;
inline constexpr std::int64_t kMaxBalanceCells = std::int64_t{1} << 22;

// Thrown by exhaustive searches when the node budget runs out before a
// decision is reached. Callers that can degrade to "unknown" catch it.
class BudgetExhausted : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TargetFunction {
    int U1 = 0, U2 = 0, W = 0;
    std::vector<int> entries;  // row-major, value of (u1, u2) at u1 * U2 + u2

    TargetFunction() = default;
    TargetFunction(int u1, int u2, int w, std::vector<int> e)
        : U1(u1), U2(u2), W(w), entries(std::move(e)) {
        if (U1 < 1 || U2 < 1 || W < 1) throw std::invalid_argument("TargetFunction: dimensions must be positive");
        if (std::int64_t(U1) * U2 != std::int64_t(entries.size()))
            throw std::invalid_argument("TargetFunction: entry count does not match dimensions");
        if (std::int64_t(W) > std::int64_t(U1) * U2)
            throw std::invalid_argument("TargetFunction: range larger than domain");
        for (int v : entries)
            if (v < 0 || v >= W) throw std::invalid_argument("TargetFunction: entry outside range");
    }

    int at(int u1, int u2) const { return entries[std::size_t(u1) * U2 + u2]; }

    std::vector<std::int64_t> value_histogram() const {
        std::vector<std::int64_t> h(W, 0);
        for (int v : entries) ++h[v];
        return h;
    }

    bool operator==(const TargetFunction&) const = default;
};

struct ChannelFunction {
    int X1 = 0, X2 = 0;
    Symbol Y = 0;
    int uses = 1;              // 1 for a base channel, n for its n-fold extension
    std::vector<Symbol> entries;

    ChannelFunction() = default;
    ChannelFunction(int x1, int x2, Symbol y, int n, std::vector<Symbol> e)
        : X1(x1), X2(x2), Y(y), uses(n), entries(std::move(e)) {
        if (X1 < 1 || X2 < 1 || Y < 1 || uses < 1)
            throw std::invalid_argument("ChannelFunction: dimensions must be positive");
        if (std::int64_t(X1) * X2 > kMaxChannelCells)
            throw std::invalid_argument("ChannelFunction: input table too large");
        if (std::int64_t(X1) * X2 != std::int64_t(entries.size()))
            throw std::invalid_argument("ChannelFunction: entry count does not match dimensions");
        for (Symbol v : entries)
            if (v < 0 || v >= Y) throw std::invalid_argument("ChannelFunction: entry outside range");
    }

    Symbol at(int x1, int x2) const { return entries[std::size_t(x1) * X2 + x2]; }

    bool operator==(const ChannelFunction&) const = default;
};

// f1, f2 map messages to (possibly multi-use) channel inputs; the decoder
// maps every channel output word to a target value.
struct Code {
    std::vector<int> f1, f2;
    std::vector<int> decoder;  // indexed by output word, size Y

    bool operator==(const Code&) const = default;
};

struct BalanceWitness {
    std::vector<int> w1, w2;                          // disjoint cover of the value range
    std::pair<std::int64_t, std::int64_t> preimage_sizes;  // cell counts under w1, w2
};

enum class TargetKind { identity, equality, greater_than, random_target };
enum class ChannelKind { binary_adder, boolean_or, random_channel };

inline TargetFunction make_builtin_target(TargetKind kind, int U, int W = 0, std::uint64_t seed = 0) {
    if (U < 1) throw std::invalid_argument("make_builtin_target: U must be positive");
    switch (kind) {
        case TargetKind::identity: {
            if (std::int64_t(U) * U > std::numeric_limits<int>::max())
                throw std::invalid_argument("make_builtin_target: identity range overflows");
            std::vector<int> e(std::size_t(U) * U);
            for (int i = 0; i < U; ++i)
                for (int j = 0; j < U; ++j) e[std::size_t(i) * U + j] = i * U + j;
            return TargetFunction(U, U, U * U, std::move(e));
        }
        case TargetKind::equality: {
            if (U < 2) throw std::invalid_argument("make_builtin_target: equality needs U >= 2");
            std::vector<int> e(std::size_t(U) * U, 0);
            for (int i = 0; i < U; ++i) e[std::size_t(i) * U + i] = 1;
            return TargetFunction(U, U, 2, std::move(e));
        }
        case TargetKind::greater_than: {
            if (U < 2) throw std::invalid_argument("make_builtin_target: greater_than needs U >= 2");
            std::vector<int> e(std::size_t(U) * U, 0);
            for (int i = 0; i < U; ++i)
                for (int j = 0; j < i; ++j) e[std::size_t(i) * U + j] = 1;
            return TargetFunction(U, U, 2, std::move(e));
        }
        case TargetKind::random_target: {
            if (W < 1) throw std::invalid_argument("make_builtin_target: random target needs W >= 1");
            Engine eng = make_engine(seed);
            std::vector<int> e(std::size_t(U) * U);
            for (auto& v : e) v = int(uniform_below(eng, std::uint64_t(W)));
            return TargetFunction(U, U, W, std::move(e));
        }
    }
    throw std::invalid_argument("make_builtin_target: unknown kind");
}

inline ChannelFunction make_builtin_channel(ChannelKind kind, int X = 0, Symbol Y = 0,
                                            std::uint64_t seed = 0) {
    switch (kind) {
        case ChannelKind::binary_adder:
            return ChannelFunction(2, 2, 3, 1, {0, 1, 1, 2});
        case ChannelKind::boolean_or:
            return ChannelFunction(2, 2, 2, 1, {0, 1, 1, 1});
        case ChannelKind::random_channel: {
            if (X < 1 || Y < 1) throw std::invalid_argument("make_builtin_channel: random channel needs X, Y >= 1");
            if (std::int64_t(X) * X > kMaxChannelCells)
                throw std::invalid_argument("make_builtin_channel: input table too large");
            Engine eng = make_engine(seed);
            std::vector<Symbol> e(std::size_t(X) * X);
            for (auto& v : e) v = Symbol(uniform_below(eng, std::uint64_t(Y)));
            return ChannelFunction(X, X, Y, 1, std::move(e));
        }
    }
    throw std::invalid_argument("make_builtin_channel: unknown kind");
}

// base^exp or nullopt on overflow past `limit`.
inline std::optional<std::int64_t> checked_pow(std::int64_t base, int exp, std::int64_t limit) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > limit / base) return std::nullopt;
        r *= base;
    }
    return r;
}

// n memoryless uses of a single-use channel, as one channel over input and
// output words. Word w encodes digits big-endian: digit i (from the most
// significant) is the symbol of use i.
inline ChannelFunction tensor_power(const ChannelFunction& g, int n) {
    if (g.uses != 1) throw std::invalid_argument("tensor_power: base channel must have uses == 1");
    if (n < 1) throw std::invalid_argument("tensor_power: n must be positive");
    if (n == 1) return g;
    auto x1n = checked_pow(g.X1, n, kMaxChannelCells);
    auto x2n = checked_pow(g.X2, n, kMaxChannelCells);
    if (!x1n || !x2n || *x1n * *x2n > kMaxChannelCells)
        throw std::overflow_error("tensor_power: input table too large");
    auto yn = checked_pow(g.Y, n, std::int64_t{1} << 62);
    if (!yn) throw std::overflow_error("tensor_power: output alphabet too large");

    const int X1 = int(*x1n), X2 = int(*x2n);
    std::vector<Symbol> e(std::size_t(X1) * X2);
    std::vector<int> d1(n), d2(n);
    for (int a = 0; a < X1; ++a) {
        int r = a;
        for (int i = n - 1; i >= 0; --i) { d1[i] = r % g.X1; r /= g.X1; }
        for (int b = 0; b < X2; ++b) {
            int s = b;
            for (int i = n - 1; i >= 0; --i) { d2[i] = s % g.X2; s /= g.X2; }
            Symbol y = 0;
            for (int i = 0; i < n; ++i) y = y * g.Y + g.at(d1[i], d2[i]);
            e[std::size_t(a) * X2 + b] = y;
        }
    }
    return ChannelFunction(X1, X2, *yn, n, std::move(e));
}

inline void validate_code_shape(const TargetFunction& a, const ChannelFunction& g, const Code& code) {
    if (int(code.f1.size()) != a.U1 || int(code.f2.size()) != a.U2)
        throw std::invalid_argument("code: encoder sizes do not match the target domain");
    for (int x : code.f1)
        if (x < 0 || x >= g.X1) throw std::invalid_argument("code: f1 value outside channel input alphabet");
    for (int x : code.f2)
        if (x < 0 || x >= g.X2) throw std::invalid_argument("code: f2 value outside channel input alphabet");
    if (std::int64_t(code.decoder.size()) != g.Y)
        throw std::invalid_argument("code: decoder must cover the full output alphabet");
    for (int w : code.decoder)
        if (w < 0 || w >= a.W) throw std::invalid_argument("code: decoder value outside target range");
}

// Fraction of message pairs decoded incorrectly, exactly.
inline Rational error_probability(const TargetFunction& a, const ChannelFunction& g, const Code& code) {
    validate_code_shape(a, g, code);
    std::int64_t wrong = 0;
    for (int u1 = 0; u1 < a.U1; ++u1)
        for (int u2 = 0; u2 < a.U2; ++u2)
            if (code.decoder[std::size_t(g.at(code.f1[u1], code.f2[u2]))] != a.at(u1, u2)) ++wrong;
    return Rational(wrong, std::int64_t(a.U1) * a.U2);
}

// Normalization result plus the maps from the original target into it, so
// codes found for the normalized target can be lifted back: a cell (i, j)
// of the original lands at (row_of[i], col_of[j]) and carries value
// value_map[a(i, j)] (unused values map to -1).
struct NormalizeMaps {
    TargetFunction target;
    std::vector<int> row_of;
    std::vector<int> col_of;
    std::vector<int> value_map;
};

// Removes duplicate rows, then duplicate columns, keeping first occurrences.
// If the shrunken domain can no longer carry the declared range, values are
// relabeled densely in increasing order of the old labels.
inline NormalizeMaps normalize_with_maps(const TargetFunction& a) {
    std::vector<int> rows, row_of(std::size_t(a.U1), -1);
    {
        std::map<std::vector<int>, int> seen;
        for (int i = 0; i < a.U1; ++i) {
            std::vector<int> row(a.entries.begin() + std::size_t(i) * a.U2,
                                 a.entries.begin() + std::size_t(i + 1) * a.U2);
            auto [it, fresh] = seen.emplace(std::move(row), int(rows.size()));
            if (fresh) rows.push_back(i);
            row_of[std::size_t(i)] = it->second;
        }
    }
    std::vector<int> cols, col_of(std::size_t(a.U2), -1);
    {
        std::map<std::vector<int>, int> seen;
        for (int j = 0; j < a.U2; ++j) {
            std::vector<int> col;
            col.reserve(rows.size());
            for (int i : rows) col.push_back(a.at(i, j));
            auto [it, fresh] = seen.emplace(std::move(col), int(cols.size()));
            if (fresh) cols.push_back(j);
            col_of[std::size_t(j)] = it->second;
        }
    }
    std::vector<int> e;
    e.reserve(rows.size() * cols.size());
    for (int i : rows)
        for (int j : cols) e.push_back(a.at(i, j));

    int U1 = int(rows.size()), U2 = int(cols.size());
    int W = a.W;
    std::vector<int> value_map(std::size_t(a.W));
    for (int v = 0; v < a.W; ++v) value_map[std::size_t(v)] = v;
    if (std::int64_t(W) > std::int64_t(U1) * U2) {
        std::vector<int> remap(std::size_t(a.W), -1);
        for (int v : e) remap[std::size_t(v)] = 0;
        int next = 0;
        for (int v = 0; v < a.W; ++v)
            if (remap[std::size_t(v)] == 0) remap[std::size_t(v)] = next++;
        for (auto& v : e) v = remap[std::size_t(v)];
        W = next;
        value_map = std::move(remap);
    }
    return NormalizeMaps{TargetFunction(U1, U2, W, std::move(e)), std::move(row_of),
                         std::move(col_of), std::move(value_map)};
}

inline TargetFunction normalize(const TargetFunction& a) {
    return normalize_with_maps(a).target;
}

inline bool is_normalized(const TargetFunction& a) {
    const TargetFunction n = normalize(a);
    return n.U1 == a.U1 && n.U2 == a.U2;
}

// Does some partition (w1, w2) of the value range put at least ceil(c*U1*U2)
// cells on each side? Exact subset-sum over the value histogram; c must lie
// in (0, 1/2]. The witness returned is the one whose w1 preimage is smallest
// among achievable masses, with w1 built from the deterministic subset-sum
// reconstruction.
inline std::optional<BalanceWitness> is_c_balanced(const TargetFunction& a, const Rational& c) {
    if (!(c > 0) || c > Rational(1, 2))
        throw std::invalid_argument("is_c_balanced: c must lie in (0, 1/2]");
    const std::int64_t total = std::int64_t(a.U1) * a.U2;
    if (total > kMaxBalanceCells) throw std::invalid_argument("is_c_balanced: domain too large for exact DP");
    const BigInt tb = ceil_div(numerator(c) * total, denominator(c));
    const std::int64_t t = tb.convert_to<std::int64_t>();
    if (2 * t > total) return std::nullopt;

    const auto h = a.value_histogram();
    // first_reach[s]: index of the histogram value whose inclusion first made
    // mass s reachable; -2 marks the empty subset.
    std::vector<std::int32_t> first_reach(std::size_t(total) + 1, -1);
    first_reach[0] = -2;
    for (int w = 0; w < a.W; ++w) {
        const std::int64_t hw = h[w];
        if (hw == 0) continue;
        for (std::int64_t s = total; s >= hw; --s)
            if (first_reach[std::size_t(s)] == -1 && first_reach[std::size_t(s - hw)] != -1)
                first_reach[std::size_t(s)] = w;
    }
    for (std::int64_t s = t; s <= total - t; ++s) {
        if (first_reach[std::size_t(s)] == -1) continue;
        BalanceWitness wit;
        std::int64_t rest = s;
        while (rest != 0) {
            const int w = first_reach[std::size_t(rest)];
            wit.w1.push_back(w);
            rest -= h[w];
        }
        std::sort(wit.w1.begin(), wit.w1.end());
        for (int w = 0; w < a.W; ++w)
            if (!std::binary_search(wit.w1.begin(), wit.w1.end(), w)) wit.w2.push_back(w);
        wit.preimage_sizes = {s, total - s};
        return wit;
    }
    return std::nullopt;
}

}  // namespace mismatchlab

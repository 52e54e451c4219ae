#pragma once
// Constructive typical sets for ordered submatrices of a (possibly
// multi-use) channel: the exact output distribution under uniform message
// pairs, deterministic Huffman code lengths over that distribution, and the
// cell set T whose outputs have short codewords. T always satisfies
//     |T| * (1 + eps) >= eps * V1 * V2           (checked in exact rationals)
//     log2 |s(T)| <= (1 + eps) * (2 + H)         (checked in doubles)
// and a failure of either check is a library bug, not an input error.

#include <mismatchlab/core.hpp>
#include <mismatchlab/rational.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace mismatchlab {

struct SubmatrixMap {
    std::vector<int> rows, cols;  // channel input words per side
    std::vector<Symbol> s;        // V1 x V2 output words, row-major

    int V1() const { return int(rows.size()); }
    int V2() const { return int(cols.size()); }
    Symbol at(int v1, int v2) const { return s[std::size_t(v1) * cols.size() + std::size_t(v2)]; }
};

inline SubmatrixMap submatrix_map(const ChannelFunction& g, std::vector<int> rows, std::vector<int> cols) {
    if (rows.empty() || cols.empty()) throw std::invalid_argument("submatrix_map: empty row or column list");
    for (int r : rows)
        if (r < 0 || r >= g.X1) throw std::invalid_argument("submatrix_map: row index out of range");
    for (int c : cols)
        if (c < 0 || c >= g.X2) throw std::invalid_argument("submatrix_map: column index out of range");
    SubmatrixMap m;
    m.s.reserve(rows.size() * cols.size());
    for (int r : rows)
        for (int c : cols) m.s.push_back(g.at(r, c));
    m.rows = std::move(rows);
    m.cols = std::move(cols);
    return m;
}

struct OutputDistribution {
    std::vector<Symbol> symbols;   // sorted ascending
    std::vector<Rational> probs;   // aligned with symbols, each count/(V1*V2)
};

inline OutputDistribution output_distribution(const SubmatrixMap& s) {
    std::map<Symbol, std::int64_t> counts;
    for (Symbol y : s.s) ++counts[y];
    OutputDistribution d;
    const std::int64_t total = std::int64_t(s.s.size());
    for (const auto& [sym, c] : counts) {
        d.symbols.push_back(sym);
        d.probs.emplace_back(c, total);
    }
    return d;
}

struct HuffmanResult {
    std::vector<int> lengths;   // per symbol, in pmf order
    Rational expected_length;
};

// Binary Huffman code lengths with a fixed tie-break: repeatedly merge the
// two least-probable nodes, ties resolved by smallest node id (leaves get
// ids 0..n-1 in pmf order, merged nodes follow in creation order). A
// single-symbol alphabet gets length 0 by convention.
inline HuffmanResult huffman_lengths(const std::vector<Rational>& pmf) {
    if (pmf.empty()) throw std::invalid_argument("huffman_lengths: empty pmf");
    Rational sum = 0;
    for (const auto& p : pmf) {
        if (p < 0) throw std::invalid_argument("huffman_lengths: negative probability");
        sum += p;
    }
    if (sum != 1) throw std::invalid_argument("huffman_lengths: pmf must sum to 1 exactly");
    const std::size_t n = pmf.size();
    if (n == 1) return {{0}, Rational(0)};

    struct Node {
        Rational p;
        int left = -1, right = -1;
    };
    std::vector<Node> nodes;
    nodes.reserve(2 * n);
    for (const auto& p : pmf) nodes.push_back({p});
    std::vector<int> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = int(i);
    auto take_min = [&]() {
        std::size_t best = 0;
        for (std::size_t i = 1; i < active.size(); ++i) {
            const int a = active[i], b = active[std::size_t(best)];
            if (nodes[std::size_t(a)].p < nodes[std::size_t(b)].p ||
                (nodes[std::size_t(a)].p == nodes[std::size_t(b)].p && a < b))
                best = i;
        }
        const int id = active[best];
        active.erase(active.begin() + std::ptrdiff_t(best));
        return id;
    };
    while (active.size() > 1) {
        const int a = take_min();
        const int b = take_min();
        nodes.push_back({nodes[std::size_t(a)].p + nodes[std::size_t(b)].p, a, b});
        active.push_back(int(nodes.size()) - 1);
    }
    std::vector<int> depth(nodes.size(), 0);
    for (std::size_t i = nodes.size(); i-- > 0;) {
        const Node& nd = nodes[i];
        if (nd.left >= 0) {
            depth[std::size_t(nd.left)] = depth[i] + 1;
            depth[std::size_t(nd.right)] = depth[i] + 1;
        }
    }
    HuffmanResult out;
    out.lengths.assign(n, 0);
    out.expected_length = 0;
    Rational kraft = 0;
    for (std::size_t i = 0; i < n; ++i) {
        out.lengths[i] = depth[i];
        out.expected_length += pmf[i] * depth[i];
        kraft += Rational(1, BigInt(1) << unsigned(depth[i]));
    }
    bool all_positive = true;
    for (const auto& p : pmf) all_positive = all_positive && p > 0;
    if (all_positive && kraft != 1) throw std::logic_error("huffman_lengths: Kraft sum must be exactly 1");
    return out;
}

inline double entropy_bits(const std::vector<Rational>& pmf) {
    double h = 0;
    for (const auto& p : pmf)
        if (p > 0) {
            const double d = to_double(p);
            h -= d * std::log2(d);
        }
    return h;
}

struct TypicalSet {
    double epsilon = 0;
    std::vector<std::pair<int, int>> cells;  // (row, col) indices into the submatrix
    std::vector<Symbol> image;               // output words covered, sorted
    Rational expected_length;                // Huffman L
    double entropy = 0;                      // H of the output distribution
};

// Cells whose output has Huffman length at most (1 + eps) * L. The length
// threshold is compared in exact rationals (eps converted exactly from its
// double representation), so boundary cases are stable.
inline TypicalSet typical_set(const SubmatrixMap& s, double epsilon) {
    if (!(epsilon > 0)) throw std::invalid_argument("typical_set: epsilon must be positive");
    const OutputDistribution dist = output_distribution(s);
    const HuffmanResult huff = huffman_lengths(dist.probs);
    const Rational eps(epsilon);
    const Rational threshold = (Rational(1) + eps) * huff.expected_length;

    TypicalSet t;
    t.epsilon = epsilon;
    t.expected_length = huff.expected_length;
    t.entropy = entropy_bits(dist.probs);
    std::unordered_set<Symbol> chosen;
    for (std::size_t i = 0; i < dist.symbols.size(); ++i)
        if (Rational(huff.lengths[i]) <= threshold) {
            chosen.insert(dist.symbols[i]);
            t.image.push_back(dist.symbols[i]);
        }
    for (int v1 = 0; v1 < s.V1(); ++v1)
        for (int v2 = 0; v2 < s.V2(); ++v2)
            if (chosen.count(s.at(v1, v2))) t.cells.emplace_back(v1, v2);

    const Rational cells_total = Rational(std::int64_t(s.s.size()));
    if (Rational(std::int64_t(t.cells.size())) * (Rational(1) + eps) < eps * cells_total)
        throw std::logic_error("typical_set: cell-count guarantee violated");
    if (std::log2(double(t.image.size())) > (1.0 + epsilon) * (2.0 + t.entropy) + 1e-9)
        throw std::logic_error("typical_set: image-size guarantee violated");
    return t;
}

}  // namespace mismatchlab

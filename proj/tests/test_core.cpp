#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "mismatchlab/core.hpp"

namespace ml = mismatchlab;

namespace {

ml::TargetFunction random_target(ml::Engine& eng, int max_u, int max_w) {
    int u1 = 1 + int(ml::uniform_below(eng, std::uint64_t(max_u)));
    int u2 = 1 + int(ml::uniform_below(eng, std::uint64_t(max_u)));
    int wcap = int(std::min<std::int64_t>(std::int64_t(u1) * u2, max_w));
    int w = 1 + int(ml::uniform_below(eng, std::uint64_t(wcap)));
    std::vector<int> e(std::size_t(u1) * u2);
    for (auto& v : e) v = int(ml::uniform_below(eng, std::uint64_t(w)));
    // every declared value must appear somewhere or W shrinks below the label max;
    // the constructor only needs entries < W, so this is already valid.
    return ml::TargetFunction(u1, u2, w, std::move(e));
}

std::int64_t subset_mass(const std::vector<std::int64_t>& h, unsigned mask) {
    std::int64_t s = 0;
    for (std::size_t v = 0; v < h.size(); ++v)
        if (mask >> v & 1u) s += h[v];
    return s;
}

bool brute_force_balanced(const ml::TargetFunction& a, const ml::Rational& c) {
    const auto h = a.value_histogram();
    const std::int64_t total = std::int64_t(a.U1) * a.U2;
    const ml::BigInt t = ml::ceil_div(ml::BigInt(numerator(c) * total), ml::BigInt(denominator(c)));
    for (unsigned mask = 0; mask < (1u << a.W); ++mask) {
        const std::int64_t m = subset_mass(h, mask);
        if (ml::BigInt(m) >= t && ml::BigInt(total - m) >= t) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("builtin targets") {
    const auto id2 = ml::make_builtin_target(ml::TargetKind::identity, 2);
    CHECK(id2.U1 == 2);
    CHECK(id2.W == 4);
    CHECK(id2.entries == std::vector<int>{0, 1, 2, 3});

    const auto eq4 = ml::make_builtin_target(ml::TargetKind::equality, 4);
    CHECK(eq4.W == 2);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(eq4.at(i, j) == (i == j ? 1 : 0));

    const auto gt3 = ml::make_builtin_target(ml::TargetKind::greater_than, 3);
    CHECK(gt3.entries == std::vector<int>{0, 0, 0, 1, 0, 0, 1, 1, 0});
    CHECK(gt3.value_histogram() == std::vector<std::int64_t>{6, 3});

    const auto r1 = ml::make_builtin_target(ml::TargetKind::random_target, 5, 7, 42);
    const auto r2 = ml::make_builtin_target(ml::TargetKind::random_target, 5, 7, 42);
    const auto r3 = ml::make_builtin_target(ml::TargetKind::random_target, 5, 7, 43);
    CHECK(r1 == r2);
    CHECK(r1.entries != r3.entries);
    for (int v : r1.entries) CHECK((v >= 0 && v < 7));

    CHECK_THROWS_AS(ml::make_builtin_target(ml::TargetKind::equality, 1), std::invalid_argument);
    CHECK_THROWS_AS(ml::make_builtin_target(ml::TargetKind::identity, 0), std::invalid_argument);
}

TEST_CASE("target validation") {
    CHECK_THROWS_AS(ml::TargetFunction(2, 2, 5, {0, 1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(ml::TargetFunction(2, 2, 4, {0, 1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(ml::TargetFunction(2, 2, 4, {0, 1, 2, 4}), std::invalid_argument);
    CHECK_THROWS_AS(ml::TargetFunction(0, 2, 1, {}), std::invalid_argument);
    const ml::TargetFunction ok(1, 2, 2, {0, 1});
    CHECK(ok.at(0, 1) == 1);
}

TEST_CASE("builtin channels") {
    const auto adder = ml::make_builtin_channel(ml::ChannelKind::binary_adder);
    CHECK(adder.Y == 3);
    CHECK(adder.entries == std::vector<ml::Symbol>{0, 1, 1, 2});
    const auto orc = ml::make_builtin_channel(ml::ChannelKind::boolean_or);
    CHECK(orc.Y == 2);
    CHECK(orc.entries == std::vector<ml::Symbol>{0, 1, 1, 1});

    const auto g1 = ml::make_builtin_channel(ml::ChannelKind::random_channel, 3, 5, 9);
    const auto g2 = ml::make_builtin_channel(ml::ChannelKind::random_channel, 3, 5, 9);
    CHECK(g1 == g2);
    for (ml::Symbol v : g1.entries) CHECK((v >= 0 && v < 5));

    CHECK_THROWS_AS(ml::ChannelFunction(2, 2, 2, 1, {0, 1, 1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(ml::ChannelFunction(2, 2, 0, 1, {}), std::invalid_argument);
}

TEST_CASE("tensor power words are big endian") {
    const auto adder = ml::make_builtin_channel(ml::ChannelKind::binary_adder);
    const auto orc = ml::make_builtin_channel(ml::ChannelKind::boolean_or);

    const auto or2 = ml::tensor_power(orc, 2);
    CHECK(or2.X1 == 4);
    CHECK(or2.Y == 4);
    CHECK(or2.uses == 2);
    CHECK(or2.at(1, 2) == 3);
    CHECK(or2.at(0, 0) == 0);
    CHECK(or2.at(2, 1) == 3);

    const auto adder2 = ml::tensor_power(adder, 2);
    CHECK(adder2.Y == 9);
    CHECK(adder2.at(0, 3) == 4);
    CHECK(adder2.at(3, 3) == 8);

    CHECK(ml::tensor_power(adder, 1) == adder);
    CHECK_THROWS_AS(ml::tensor_power(adder2, 2), std::invalid_argument);
    CHECK_THROWS_AS(ml::tensor_power(adder, 13), std::overflow_error);
}

TEST_CASE("tensor power splits into word halves") {
    const auto g = ml::make_builtin_channel(ml::ChannelKind::random_channel, 3, 4, 7);
    const auto g1 = g;
    const auto g2 = ml::tensor_power(g, 2);
    const auto g3 = ml::tensor_power(g, 3);
    const std::int64_t X = 3, Y = 4;
    for (int hi1 = 0; hi1 < 3; ++hi1)
        for (int lo1 = 0; lo1 < 9; ++lo1)
            for (int hi2 = 0; hi2 < 3; ++hi2)
                for (int lo2 = 0; lo2 < 9; ++lo2) {
                    const int x1 = int(hi1 * X * X + lo1);
                    const int x2 = int(hi2 * X * X + lo2);
                    const ml::Symbol want = g1.at(hi1, hi2) * Y * Y + g2.at(lo1, lo2);
                    CHECK(g3.at(x1, x2) == want);
                }
}

TEST_CASE("error probability is an exact fraction") {
    const auto eq10 = ml::make_builtin_target(ml::TargetKind::equality, 10);
    const ml::ChannelFunction constant(10, 10, 1, 1, std::vector<ml::Symbol>(100, 0));
    const ml::Code all_zero{std::vector<int>(10, 0), std::vector<int>(10, 0), {0}};
    ml::Code spread = all_zero;
    for (int i = 0; i < 10; ++i) spread.f1[std::size_t(i)] = spread.f2[std::size_t(i)] = i;
    CHECK(ml::error_probability(eq10, constant, spread) == ml::Rational(1, 10));

    const auto eq2 = ml::make_builtin_target(ml::TargetKind::equality, 2);
    const auto or2 = ml::tensor_power(ml::make_builtin_channel(ml::ChannelKind::boolean_or), 2);
    const ml::Code repeat{{1, 2}, {1, 2}, {0, 1, 1, 0}};
    CHECK(ml::error_probability(eq2, or2, repeat) == 0);

    const auto orc = ml::make_builtin_channel(ml::ChannelKind::boolean_or);
    const ml::Code guess_zero{{0, 1}, {0, 1}, {0, 0}};
    CHECK(ml::error_probability(eq2, orc, guess_zero) == ml::Rational(1, 2));

    CHECK_THROWS_AS(ml::error_probability(eq2, orc, ml::Code{{0}, {0, 1}, {0, 0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ml::error_probability(eq2, orc, ml::Code{{0, 2}, {0, 1}, {0, 0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ml::error_probability(eq2, orc, ml::Code{{0, 1}, {0, 1}, {0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ml::error_probability(eq2, orc, ml::Code{{0, 1}, {0, 1}, {0, 2}}),
                    std::invalid_argument);
}

TEST_CASE("normalize removes duplicate rows and columns") {
    const ml::TargetFunction a(3, 2, 4, {0, 1, 0, 1, 2, 3});
    const auto n = ml::normalize(a);
    CHECK(n.U1 == 2);
    CHECK(n.U2 == 2);
    CHECK(n.entries == std::vector<int>{0, 1, 2, 3});
    CHECK(n.W == 4);
    CHECK(ml::is_normalized(n));
    CHECK(!ml::is_normalized(a));

    const ml::TargetFunction flat(3, 3, 1, std::vector<int>(9, 0));
    const auto nf = ml::normalize(flat);
    CHECK(nf.U1 == 1);
    CHECK(nf.U2 == 1);
    CHECK(nf.W == 1);

    // range larger than the shrunken domain forces dense relabeling
    const ml::TargetFunction wide(3, 2, 4, {0, 3, 0, 3, 0, 3});
    const auto nw = ml::normalize(wide);
    CHECK(nw.U1 == 1);
    CHECK(nw.U2 == 2);
    CHECK(nw.W == 2);
    CHECK(nw.entries == std::vector<int>{0, 1});

    const auto gt3 = ml::make_builtin_target(ml::TargetKind::greater_than, 3);
    CHECK(ml::normalize(gt3) == gt3);
    CHECK(ml::is_normalized(gt3));
}

TEST_CASE("normalize is idempotent on random targets") {
    ml::Engine eng = ml::make_engine(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = random_target(eng, 5, 6);
        const auto n = ml::normalize(a);
        CHECK(ml::is_normalized(n));
        CHECK(ml::normalize(n) == n);
        CHECK(n.U1 <= a.U1);
        CHECK(n.U2 <= a.U2);
        // surviving representative rows and columns keep their values
        CHECK(n.W <= a.W);
    }
}

TEST_CASE("balance witness matches the worked examples") {
    const auto gt4 = ml::make_builtin_target(ml::TargetKind::greater_than, 4);
    const auto w = ml::is_c_balanced(gt4, ml::Rational(1, 4));
    REQUIRE(w.has_value());
    CHECK(w->w1 == std::vector<int>{1});
    CHECK(w->w2 == std::vector<int>{0});
    CHECK(w->preimage_sizes == std::pair<std::int64_t, std::int64_t>{6, 10});

    const auto eq4 = ml::make_builtin_target(ml::TargetKind::equality, 4);
    const auto we = ml::is_c_balanced(eq4, ml::Rational(1, 4));
    REQUIRE(we.has_value());
    CHECK(we->w1 == std::vector<int>{1});
    CHECK(we->preimage_sizes == std::pair<std::int64_t, std::int64_t>{4, 12});

    const auto eq8 = ml::make_builtin_target(ml::TargetKind::equality, 8);
    CHECK(!ml::is_c_balanced(eq8, ml::Rational(1, 3)).has_value());

    CHECK_THROWS_AS(ml::is_c_balanced(eq4, ml::Rational(0)), std::invalid_argument);
    CHECK_THROWS_AS(ml::is_c_balanced(eq4, ml::Rational(2, 3)), std::invalid_argument);
    CHECK_THROWS_AS(ml::is_c_balanced(eq4, ml::Rational(-1, 4)), std::invalid_argument);
}

TEST_CASE("balance decision agrees with subset enumeration") {
    ml::Engine eng = ml::make_engine(77);
    const std::vector<ml::Rational> cs{{1, 4}, {1, 3}, {1, 2}};
    for (int trial = 0; trial < 400; ++trial) {
        const auto a = random_target(eng, 5, 10);
        for (const auto& c : cs) {
            const auto got = ml::is_c_balanced(a, c);
            CHECK(got.has_value() == brute_force_balanced(a, c));
            if (got) {
                const auto h = a.value_histogram();
                const std::int64_t total = std::int64_t(a.U1) * a.U2;
                const ml::BigInt t =
                    ml::ceil_div(ml::BigInt(numerator(c) * total), ml::BigInt(denominator(c)));
                std::int64_t m1 = 0, m2 = 0;
                std::set<int> seen;
                for (int v : got->w1) { m1 += h[std::size_t(v)]; seen.insert(v); }
                for (int v : got->w2) { m2 += h[std::size_t(v)]; seen.insert(v); }
                CHECK(int(seen.size()) == a.W);
                CHECK(int(got->w1.size() + got->w2.size()) == a.W);
                CHECK(ml::BigInt(m1) >= t);
                CHECK(ml::BigInt(m2) >= t);
                CHECK(got->preimage_sizes == std::pair<std::int64_t, std::int64_t>{m1, m2});
            }
        }
        // balance is monotone: shrinking c keeps every witness valid
        if (ml::is_c_balanced(a, ml::Rational(1, 2)))
            CHECK(ml::is_c_balanced(a, ml::Rational(1, 4)).has_value());
    }
}

TEST_CASE("checked_pow guards overflow") {
    CHECK(ml::checked_pow(2, 10, 2000) == 1024);
    CHECK(!ml::checked_pow(10, 7, 1000000).has_value());
    CHECK(ml::checked_pow(5, 0, 1) == 1);
}

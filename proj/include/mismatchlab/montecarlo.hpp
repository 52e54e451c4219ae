#pragma once
// Seeded Monte Carlo experiments over random channels and targets, with
// deterministic, shard-independent reports. Every trial derives its own
// engine from (seed, trial index), so the merged report does not depend on
// how trials are split across threads. MISMATCHLAB_THREADS caps workers.
//
// Random channel entries are drawn by quantile coupling: per trial a vector
// of uniforms u is drawn once and entry j at alphabet size Y is
// floor(u_j * Y). Runs at different Y on the same seed therefore share
// randomness, which makes paired trend comparisons exact; for nested Y
// chains (each dividing the next) the per-trial channels are coarsenings of
// one another. The quantization bias relative to exact uniformity is
// O(Y / 2^53) per entry, far below anything resolvable at the trial counts
// used here.

#include <mismatchlab/core.hpp>
#include <mismatchlab/feasibility.hpp>
#include <mismatchlab/graphcodes.hpp>
#include <mismatchlab/rational.hpp>
#include <mismatchlab/rng.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

namespace mismatchlab {

struct ExperimentReport {
    std::string name;
    std::vector<std::pair<std::string, std::string>> parameters;  // insertion-ordered
    std::uint64_t trials = 0, successes = 0, failures = 0, unknowns = 0;
    Rational estimate;                 // successes / trials
    double ci_lo = 0, ci_hi = 1;       // Wilson 95%
    std::optional<double> paper_bound;
    std::uint64_t seed = 0;
};

inline std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double n = double(trials), p = double(successes) / n;
    const double denom = 1.0 + z * z / n;
    const double center = (p + z * z / (2 * n)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline unsigned thread_cap() {
    if (const char* env = std::getenv("MISMATCHLAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return unsigned(std::min(v, 256L));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// body(i) must touch only slots owned by trial i.
template <typename Fn>
inline void parallel_for_trials(std::uint64_t trials, Fn&& body) {
    const std::uint64_t cap = std::min<std::uint64_t>(thread_cap(), trials);
    if (cap <= 1) {
        for (std::uint64_t i = 0; i < trials; ++i) body(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(std::size_t(cap));
    for (std::uint64_t t = 0; t < cap; ++t) {
        const std::uint64_t lo = trials * t / cap, hi = trials * (t + 1) / cap;
        workers.emplace_back([&, lo, hi] {
            try {
                for (std::uint64_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (first_error) std::rethrow_exception(first_error);
}

enum : std::int8_t { kFail = 0, kSuccess = 1, kUnknown = 2 };

inline ExperimentReport make_report(std::string name,
                                    std::vector<std::pair<std::string, std::string>> params,
                                    std::uint64_t seed, const std::vector<std::int8_t>& cats,
                                    std::optional<double> paper_bound) {
    ExperimentReport r;
    r.name = std::move(name);
    r.parameters = std::move(params);
    r.seed = seed;
    r.trials = cats.size();
    for (std::int8_t c : cats) {
        if (c == kSuccess) ++r.successes;
        else if (c == kFail) ++r.failures;
        else ++r.unknowns;
    }
    r.estimate = r.trials ? Rational(r.successes, r.trials) : Rational(0);
    std::tie(r.ci_lo, r.ci_hi) = wilson_interval(r.successes, r.trials);
    r.paper_bound = paper_bound;
    return r;
}

inline ChannelFunction channel_from_uniforms(int X, Symbol Y, const std::vector<double>& u) {
    std::vector<Symbol> e(u.size());
    for (std::size_t j = 0; j < u.size(); ++j)
        e[j] = std::min<Symbol>(Y - 1, Symbol(u[j] * double(Y)));
    return ChannelFunction(X, X, Y, 1, std::move(e));
}

inline ChannelFunction channel_from_index(int X, Symbol Y, std::uint64_t index) {
    std::vector<Symbol> e(std::size_t(X) * X);
    for (auto& v : e) {
        v = Symbol(index % std::uint64_t(Y));
        index /= std::uint64_t(Y);
    }
    return ChannelFunction(X, X, Y, 1, std::move(e));
}

}  // namespace detail

enum class FeasibilityChecker { exact, identity_construction, equality_construction };

namespace detail {

inline std::int8_t run_checker(const TargetFunction& a, const ChannelFunction& base, int uses,
                               FeasibilityChecker checker, std::uint64_t budget,
                               std::uint64_t aux_seed) {
    const ChannelFunction g = uses > 1 ? tensor_power(base, uses) : base;
    switch (checker) {
        case FeasibilityChecker::exact: {
            const FeasibilityVerdict v = zero_feasible_search(a, g, SearchMode::pruned, budget);
            if (v.status == Feasibility::feasible) return kSuccess;
            return v.status == Feasibility::infeasible ? kFail : kUnknown;
        }
        case FeasibilityChecker::identity_construction: {
            const CodeResult r = build_identity_code(g, a.U1, SubgraphMode::exact, budget);
            if (r.outcome == SearchOutcome::unknown) return kUnknown;
            if (r.outcome == SearchOutcome::absent) return kFail;
            if (error_probability(a, g, *r.code) != 0)
                throw std::logic_error("identity construction emitted a non-zero-error code");
            return kSuccess;
        }
        case FeasibilityChecker::equality_construction: {
            const CodeResult r = build_equality_code(g, a.U1, aux_seed, MatchingMode::greedy, budget);
            if (r.outcome != SearchOutcome::found) return kFail;  // matching too small
            if (error_probability(a, g, *r.code) != 0)
                throw std::logic_error("equality construction emitted a non-zero-error code");
            return kSuccess;
        }
    }
    throw std::invalid_argument("run_checker: unknown checker");
}

inline const char* checker_name(FeasibilityChecker c) {
    switch (c) {
        case FeasibilityChecker::exact: return "exact";
        case FeasibilityChecker::identity_construction: return "identity_construction";
        case FeasibilityChecker::equality_construction: return "equality_construction";
    }
    return "?";
}

inline void validate_experiment_target(const TargetFunction& a, int X, Symbol Y, int uses,
                                       FeasibilityChecker checker) {
    if (X < 1 || Y < 1 || uses < 1)
        throw std::invalid_argument("feasibility experiment: channel parameters must be positive");
    switch (checker) {
        case FeasibilityChecker::exact:
            if (!is_normalized(a))
                throw std::invalid_argument("feasibility experiment: exact checker needs a normalized target");
            break;
        case FeasibilityChecker::identity_construction:
            if (a != make_builtin_target(TargetKind::identity, a.U1))
                throw std::invalid_argument("feasibility experiment: identity checker needs the identity target");
            break;
        case FeasibilityChecker::equality_construction: {
            if (a != make_builtin_target(TargetKind::equality, a.U1))
                throw std::invalid_argument("feasibility experiment: equality checker needs the equality target");
            auto yn = checked_pow(Y, uses, std::int64_t{1} << 62);
            if (!yn || *yn < 16 * std::int64_t(a.U1))
                throw std::invalid_argument("feasibility experiment: output alphabet too small, need Y >= 16U");
            break;
        }
    }
}

}  // namespace detail

// Success fraction of `checker` on random X x X channels over [0, Y) at the
// given number of uses, paired across all alphabet sizes in Ys: trial i
// draws one uniform vector and quantizes it at every Y. Returns one report
// per Y, all carrying the same seed.
inline std::vector<ExperimentReport> feasibility_fraction_paired(
    const TargetFunction& a, const std::string& target_label, int X, const std::vector<Symbol>& Ys,
    int uses, FeasibilityChecker checker, std::uint64_t trials, std::uint64_t seed,
    std::uint64_t budget = kDefaultSearchBudget) {
    if (Ys.empty()) throw std::invalid_argument("feasibility_fraction_paired: no alphabet sizes");
    if (trials == 0) throw std::invalid_argument("feasibility_fraction_paired: trials must be positive");
    for (Symbol y : Ys) detail::validate_experiment_target(a, X, y, uses, checker);

    std::vector<std::vector<std::int8_t>> cats(Ys.size(), std::vector<std::int8_t>(trials, detail::kFail));
    detail::parallel_for_trials(trials, [&](std::uint64_t i) {
        Engine eng = make_engine(derive_seed(seed, i));
        std::vector<double> u(std::size_t(X) * X);
        for (auto& v : u) v = uniform_double(eng);
        const std::uint64_t aux_seed = derive_seed(seed, i) ^ 0xa5a5a5a5a5a5a5a5ULL;
        for (std::size_t yi = 0; yi < Ys.size(); ++yi) {
            const ChannelFunction base = detail::channel_from_uniforms(X, Ys[yi], u);
            cats[yi][i] = detail::run_checker(a, base, uses, checker, budget, aux_seed);
        }
    });
    std::vector<ExperimentReport> out;
    for (std::size_t yi = 0; yi < Ys.size(); ++yi) {
        std::vector<std::pair<std::string, std::string>> params{
            {"target", target_label},
            {"X", std::to_string(X)},
            {"Y", std::to_string(Ys[yi])},
            {"uses", std::to_string(uses)},
            {"checker", detail::checker_name(checker)},
            {"mode", "sampled"},
            {"budget", std::to_string(budget)},
        };
        out.push_back(detail::make_report("feasibility_fraction", std::move(params), seed, cats[yi],
                                          std::nullopt));
    }
    return out;
}

// Single-alphabet feasibility fraction. When every channel can be
// enumerated (Y^(X*X) <= 2^20) sampling is replaced by exhaustive
// enumeration and the report is exact (trials = channel count).
inline ExperimentReport feasibility_fraction(const TargetFunction& a, const std::string& target_label,
                                             int X, Symbol Y, int uses, FeasibilityChecker checker,
                                             std::uint64_t trials, std::uint64_t seed,
                                             std::uint64_t budget = kDefaultSearchBudget) {
    detail::validate_experiment_target(a, X, Y, uses, checker);
    const auto count = checked_pow(Y, X * X, std::int64_t{1} << 20);
    if (count) {
        std::vector<std::int8_t> cats(std::size_t(*count), detail::kFail);
        detail::parallel_for_trials(std::uint64_t(*count), [&](std::uint64_t i) {
            const ChannelFunction base = detail::channel_from_index(X, Y, i);
            cats[i] = detail::run_checker(a, base, uses, checker, budget,
                                          derive_seed(seed, i) ^ 0xa5a5a5a5a5a5a5a5ULL);
        });
        std::vector<std::pair<std::string, std::string>> params{
            {"target", target_label},
            {"X", std::to_string(X)},
            {"Y", std::to_string(Y)},
            {"uses", std::to_string(uses)},
            {"checker", detail::checker_name(checker)},
            {"mode", "exhaustive"},
            {"budget", std::to_string(budget)},
        };
        return detail::make_report("feasibility_fraction", std::move(params), seed, cats, std::nullopt);
    }
    return feasibility_fraction_paired(a, target_label, X, {Y}, uses, checker, trials, seed, budget)[0];
}

// Empirical probability that a random X x X channel over [0, Y) has at
// least X^2 - X + 1 distinct entries. The analytic bound 1 - exp(-(X - 2))
// is attached when Y >= e^3 X^3.
inline ExperimentReport distinct_entries_experiment(int X, Symbol Y, std::uint64_t trials,
                                                    std::uint64_t seed) {
    if (X < 1 || Y < 1) throw std::invalid_argument("distinct_entries_experiment: X, Y must be positive");
    if (trials == 0) throw std::invalid_argument("distinct_entries_experiment: trials must be positive");
    const std::int64_t need = std::int64_t(X) * X - X + 1;
    std::vector<std::int8_t> cats(trials, detail::kFail);
    detail::parallel_for_trials(trials, [&](std::uint64_t i) {
        Engine eng = make_engine(derive_seed(seed, i));
        std::unordered_set<Symbol> seen;
        for (int j = 0; j < X * X; ++j) seen.insert(Symbol(uniform_below(eng, std::uint64_t(Y))));
        cats[i] = std::int64_t(seen.size()) >= need ? detail::kSuccess : detail::kFail;
    });
    std::optional<double> bound;
    if (double(Y) >= std::exp(3.0) * double(X) * double(X) * double(X))
        bound = 1.0 - std::exp(-double(X - 2));
    std::vector<std::pair<std::string, std::string>> params{
        {"X", std::to_string(X)},
        {"Y", std::to_string(Y)},
        {"distinct_needed", std::to_string(need)},
    };
    return detail::make_report("distinct_entries", std::move(params), seed, cats, bound);
}

// z = sum of N geometric rounds with p_i = 1 - (i-1)/Y; reports P(z >
// threshold). The mean of z and its analytic value sum 1/p_i ride along in
// the parameters.
inline ExperimentReport coupon_collector_sim(Symbol Y, std::int64_t N, std::uint64_t threshold,
                                             std::uint64_t trials, std::uint64_t seed) {
    if (Y < 1 || N < 1 || N > Y) throw std::domain_error("coupon_collector_sim: need 1 <= N <= Y");
    if (trials == 0) throw std::invalid_argument("coupon_collector_sim: trials must be positive");
    std::vector<std::int8_t> cats(trials, detail::kFail);
    std::vector<double> zs(trials, 0.0);
    detail::parallel_for_trials(trials, [&](std::uint64_t i) {
        Engine eng = make_engine(derive_seed(seed, i));
        std::uint64_t z = 0;
        for (std::int64_t j = 1; j <= N; ++j)
            z += geometric(eng, 1.0 - double(j - 1) / double(Y));
        cats[i] = z > threshold ? detail::kSuccess : detail::kFail;
        zs[i] = double(z);
    });
    double mean = 0, expect = 0;
    for (double z : zs) mean += z;
    mean /= double(trials);
    for (std::int64_t j = 1; j <= N; ++j) expect += 1.0 / (1.0 - double(j - 1) / double(Y));
    std::vector<std::pair<std::string, std::string>> params{
        {"Y", std::to_string(Y)},
        {"N", std::to_string(N)},
        {"threshold", std::to_string(threshold)},
        {"mean_z", format_double(mean)},
        {"expected_rounds", format_double(expect)},
    };
    return detail::make_report("coupon_collector", std::move(params), seed, cats, std::nullopt);
}

enum class ChernoffKind { upper_mult, lower_mult };

// Multiplicative Chernoff bounds for a sum with mean mu:
//   upper_mult: P(z >= (1+gamma) mu) <= (e^gamma / (1+gamma)^(1+gamma))^mu
//   lower_mult: P(z <= (1-gamma) mu) <= exp(-mu gamma^2 / 2)
inline double chernoff_bound(ChernoffKind kind, double mu, double gamma) {
    if (!(mu > 0)) throw std::domain_error("chernoff_bound: mu must be positive");
    if (kind == ChernoffKind::upper_mult) {
        if (!(gamma > 0)) throw std::domain_error("chernoff_bound: gamma must be positive");
        return std::exp(mu * (gamma - (1.0 + gamma) * std::log1p(gamma)));
    }
    if (!(gamma > 0) || gamma > 1)
        throw std::domain_error("chernoff_bound: lower_mult needs gamma in (0, 1]");
    return std::exp(-mu * gamma * gamma / 2.0);
}

enum class TailKind { above, below };

// P(Binomial(N, p) > threshold) or < threshold, exactly.
inline Rational exact_binomial_tail(int N, const Rational& p, TailKind kind, int threshold) {
    if (N < 0 || N > 64) throw std::invalid_argument("exact_binomial_tail: need 0 <= N <= 64");
    if (p < 0 || p > 1) throw std::invalid_argument("exact_binomial_tail: p outside [0, 1]");
    const Rational q = Rational(1) - p;
    Rational total = 0;
    BigInt binom = 1;  // C(N, k), updated incrementally
    Rational pk = 1;   // p^k
    std::vector<Rational> qn(std::size_t(N) + 1);
    qn[0] = 1;
    for (int i = 1; i <= N; ++i) qn[std::size_t(i)] = qn[std::size_t(i - 1)] * q;
    for (int k = 0; k <= N; ++k) {
        const bool in_tail = kind == TailKind::above ? (k > threshold) : (k < threshold);
        if (in_tail) total += Rational(binom) * pk * qn[std::size_t(N - k)];
        binom = binom * (N - k) / (k + 1);
        pk *= p;
    }
    return total;
}

// Fraction of random U x U targets over W values for which the fixed half
// split w1 = {0, ..., floor(W/2)-1} is c-balanced; a secondary counter
// reports how often the exact any-partition DP succeeds. Exhaustive when
// all W^(U^2) targets fit the enumeration budget.
inline ExperimentReport balanced_fraction_experiment(int U, int W, const Rational& c,
                                                     std::uint64_t trials, std::uint64_t seed) {
    if (U < 1 || W < 2) throw std::invalid_argument("balanced_fraction_experiment: need U >= 1, W >= 2");
    if (std::int64_t(W) > std::int64_t(U) * U)
        throw std::invalid_argument("balanced_fraction_experiment: range larger than domain");
    if (!(c > 0) || c > Rational(1, 2))
        throw std::invalid_argument("balanced_fraction_experiment: c must lie in (0, 1/2]");
    const std::int64_t total = std::int64_t(U) * U;
    const std::int64_t t = ceil_div(numerator(c) * total, denominator(c)).convert_to<std::int64_t>();
    const int split = W / 2;  // w1 = {0, ..., split-1}

    auto classify = [&](const std::vector<int>& entries) -> std::pair<std::int8_t, std::int8_t> {
        std::int64_t m1 = 0;
        for (int v : entries)
            if (v < split) ++m1;
        const std::int8_t fixed =
            (m1 >= t && total - m1 >= t) ? detail::kSuccess : detail::kFail;
        const TargetFunction a(U, U, W, entries);
        const std::int8_t dp = is_c_balanced(a, c) ? detail::kSuccess : detail::kFail;
        return {fixed, dp};
    };

    const auto count = checked_pow(W, U * U, std::int64_t{1} << 20);
    std::vector<std::int8_t> cats, dp_cats;
    std::string mode;
    std::uint64_t n;
    if (count) {
        mode = "exhaustive";
        n = std::uint64_t(*count);
    } else {
        mode = "sampled";
        if (trials == 0) throw std::invalid_argument("balanced_fraction_experiment: trials must be positive");
        n = trials;
    }
    cats.assign(n, detail::kFail);
    dp_cats.assign(n, detail::kFail);
    detail::parallel_for_trials(n, [&](std::uint64_t i) {
        std::vector<int> entries(static_cast<std::size_t>(total));
        if (count) {
            std::uint64_t index = i;
            for (auto& v : entries) {
                v = int(index % std::uint64_t(W));
                index /= std::uint64_t(W);
            }
        } else {
            Engine eng = make_engine(derive_seed(seed, i));
            for (auto& v : entries) v = int(uniform_below(eng, std::uint64_t(W)));
        }
        std::tie(cats[i], dp_cats[i]) = classify(entries);
    });
    std::uint64_t dp_successes = 0;
    for (std::int8_t v : dp_cats)
        if (v == detail::kSuccess) ++dp_successes;
    std::vector<std::pair<std::string, std::string>> params{
        {"U", std::to_string(U)},
        {"W", std::to_string(W)},
        {"c", rational_to_string(c)},
        {"threshold_cells", std::to_string(t)},
        {"mode", mode},
        {"dp_balanced", std::to_string(dp_successes)},
        {"dp_fraction", rational_to_string(Rational(dp_successes, n))},
    };
    return detail::make_report("balanced_fraction", std::move(params), seed, cats, std::nullopt);
}

struct ApproximationBound {
    double alpha = 0;
    double bound = 1;   // raw value clamped into [0, 1]
    bool vacuous = false;
};

// alpha = (1-delta) ln(W (1-delta)) - (1-delta); bound = exp(2U lnU -
// alpha U^2), clamped to [0,1] and flagged vacuous when the raw value is
// >= 1 (which happens whenever alpha <= 2 lnU / U).
inline ApproximationBound approximation_bound(double U, std::int64_t W, double delta) {
    if (U < 1) throw std::domain_error("approximation_bound: U must be at least 1");
    if (W < 2) throw std::domain_error("approximation_bound: W must be at least 2");
    if (!(delta > 0) || !(delta < 1.0 - 1.0 / double(W)))
        throw std::domain_error("approximation_bound: delta must lie in (0, 1 - 1/W)");
    ApproximationBound out;
    out.alpha = (1.0 - delta) * std::log(double(W) * (1.0 - delta)) - (1.0 - delta);
    const double raw = std::exp(2.0 * U * std::log(U) - out.alpha * U * U);
    out.vacuous = !(raw < 1.0);
    out.bound = out.vacuous ? 1.0 : raw;
    return out;
}

}  // namespace mismatchlab

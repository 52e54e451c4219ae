#pragma once
// Rate analytics for multi-shot schemes: conditional output entropies under
// product input distributions with time sharing, the maximum output entropy
// H*, the minimum number of channel uses supporting the identity function,
// and the cut-set comparison value. All entropies are in bits.
//
// Optimizers are multistart projected gradient ascent on probability
// simplices. They maximize over a nonconvex landscape, so results carry the
// usual caveat: the returned value is the best stationary value found from
// >= 32 seeded starts (uniform included). Test oracles bracket the committed
// instances by dense grid search.

#include <mismatchlab/core.hpp>
#include <mismatchlab/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mismatchlab {

struct InputDistribution {
    int Q = 1;
    std::vector<double> q_weights;          // length Q
    std::vector<std::vector<double>> p1;    // Q rows over X1
    std::vector<std::vector<double>> p2;    // Q rows over X2
};

struct RateTriple {
    double h_y_q = 0, h_y_x1_q = 0, h_y_x2_q = 0;
};

namespace detail {

inline void check_pmf_row(const std::vector<double>& row, std::size_t n, const char* what) {
    if (row.size() != n) throw std::invalid_argument(std::string(what) + ": wrong length");
    double sum = 0;
    for (double v : row) {
        if (!(v >= 0)) throw std::invalid_argument(std::string(what) + ": negative weight");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument(std::string(what) + ": row does not sum to 1");
}

inline double xlog2x(double p) { return p > 0 ? p * std::log2(p) : 0.0; }

inline double entropy_bits(const std::vector<double>& pmf) {
    double h = 0;
    for (double p : pmf) h -= xlog2x(p);
    return h;
}

// Euclidean projection onto the probability simplex: theta is the largest
// shift (sum_{i<k} u_i - 1)/k keeping the top-k entries positive.
inline void project_simplex(std::vector<double>& v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0, theta = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        const double t = (css - 1.0) / double(i + 1);
        if (u[i] - t > 0) theta = t;
        else break;
    }
    double total = 0;
    for (auto& x : v) { x = std::max(0.0, x - theta); total += x; }
    if (total > 0)
        for (auto& x : v) x /= total;  // guard against floating drift
    else
        std::fill(v.begin(), v.end(), 1.0 / double(v.size()));
}

inline std::vector<double> dirichlet_uniform(Engine& eng, std::size_t n) {
    std::vector<double> v(n);
    double s = 0;
    for (auto& x : v) { x = -std::log(uniform_double(eng)); s += x; }
    for (auto& x : v) x /= s;
    return v;
}

}  // namespace detail

inline void validate_distribution(const InputDistribution& d, const ChannelFunction& g) {
    if (d.Q < 1) throw std::invalid_argument("InputDistribution: Q must be positive");
    detail::check_pmf_row(d.q_weights, std::size_t(d.Q), "q_weights");
    if (int(d.p1.size()) != d.Q || int(d.p2.size()) != d.Q)
        throw std::invalid_argument("InputDistribution: row count must equal Q");
    for (int q = 0; q < d.Q; ++q) {
        detail::check_pmf_row(d.p1[std::size_t(q)], std::size_t(g.X1), "p1 row");
        detail::check_pmf_row(d.p2[std::size_t(q)], std::size_t(g.X2), "p2 row");
    }
}

// H(y|q), H(y|x1,q), H(y|x2,q) for y = g(x1, x2) under p(q) p(x1|q) p(x2|q).
inline RateTriple rate_triple(const ChannelFunction& g, const InputDistribution& d) {
    validate_distribution(d, g);
    if (g.Y > kMaxDecoderSize) throw std::invalid_argument("rate_triple: output alphabet too large");
    RateTriple t;
    std::vector<double> pmf(std::size_t(g.Y));
    std::vector<double> row(std::size_t(g.Y));
    for (int q = 0; q < d.Q; ++q) {
        const double w = d.q_weights[std::size_t(q)];
        if (w == 0) continue;
        const auto& a = d.p1[std::size_t(q)];
        const auto& b = d.p2[std::size_t(q)];
        std::fill(pmf.begin(), pmf.end(), 0.0);
        double h1 = 0, h2 = 0;
        for (int x1 = 0; x1 < g.X1; ++x1) {
            if (a[std::size_t(x1)] == 0) continue;
            std::fill(row.begin(), row.end(), 0.0);
            for (int x2 = 0; x2 < g.X2; ++x2) row[std::size_t(g.at(x1, x2))] += b[std::size_t(x2)];
            h1 += a[std::size_t(x1)] * detail::entropy_bits(row);
            for (Symbol y = 0; y < g.Y; ++y) pmf[std::size_t(y)] += a[std::size_t(x1)] * row[std::size_t(y)];
        }
        for (int x2 = 0; x2 < g.X2; ++x2) {
            if (b[std::size_t(x2)] == 0) continue;
            std::fill(row.begin(), row.end(), 0.0);
            for (int x1 = 0; x1 < g.X1; ++x1) row[std::size_t(g.at(x1, x2))] += a[std::size_t(x1)];
            h2 += b[std::size_t(x2)] * detail::entropy_bits(row);
        }
        t.h_y_q += w * detail::entropy_bits(pmf);
        t.h_y_x1_q += w * h1;
        t.h_y_x2_q += w * h2;
    }
    return t;
}

struct EntropyOpts {
    int starts = 32;
    double tol = 1e-9;
    int max_iter = 10000;
    std::uint64_t seed = 0x6d69736d6c616221ULL;
};

namespace detail {

inline double safe_log2(double x) { return std::log2(std::max(x, 1e-300)); }

// Maximize H(sum_k p[k] * cond[k]) over the simplex by projected gradient
// ascent with backtracking. cond rows are pmfs over the output alphabet.
inline double ascend_mixture_entropy(std::vector<double>& p, const std::vector<std::vector<double>>& cond,
                                     double tol, int max_iter) {
    const std::size_t n = p.size(), Y = cond.empty() ? 0 : cond[0].size();
    std::vector<double> pmf(Y), grad(n), cand(n);
    auto value = [&](const std::vector<double>& x) {
        std::fill(pmf.begin(), pmf.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k)
            if (x[k] > 0)
                for (std::size_t y = 0; y < Y; ++y) pmf[y] += x[k] * cond[k][y];
        return entropy_bits(pmf);
    };
    double f = value(p);
    const double log2e = 1.0 / std::log(2.0);
    for (int it = 0; it < max_iter; ++it) {
        // pmf holds the mixture for p after the last value() call
        std::fill(pmf.begin(), pmf.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k)
            if (p[k] > 0)
                for (std::size_t y = 0; y < Y; ++y) pmf[y] += p[k] * cond[k][y];
        for (std::size_t k = 0; k < n; ++k) {
            double gk = 0;
            for (std::size_t y = 0; y < Y; ++y)
                if (cond[k][y] > 0) gk -= cond[k][y] * (safe_log2(pmf[y]) + log2e);
            grad[k] = gk;
        }
        double eta = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t k = 0; k < n; ++k) cand[k] = p[k] + eta * grad[k];
            project_simplex(cand);
            const double fc = value(cand);
            if (fc > f) {
                const double gain = fc - f;
                p = cand;
                f = fc;
                accepted = true;
                if (gain < tol) return f;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) return f;
    }
    return f;
}

}  // namespace detail

// H*(G): maximum output entropy over independent single-use inputs.
// Alternating maximization, each half-step a concave simplex ascent.
inline double max_output_entropy(const ChannelFunction& g, const EntropyOpts& opts = {}) {
    if (g.uses != 1) throw std::invalid_argument("max_output_entropy: base channel expected (uses == 1)");
    auto conditionals_given_p1 = [&](const std::vector<double>& p1) {
        std::vector<std::vector<double>> cond(std::size_t(g.X2), std::vector<double>(std::size_t(g.Y), 0.0));
        for (int x2 = 0; x2 < g.X2; ++x2)
            for (int x1 = 0; x1 < g.X1; ++x1)
                cond[std::size_t(x2)][std::size_t(g.at(x1, x2))] += p1[std::size_t(x1)];
        return cond;
    };
    auto conditionals_given_p2 = [&](const std::vector<double>& p2) {
        std::vector<std::vector<double>> cond(std::size_t(g.X1), std::vector<double>(std::size_t(g.Y), 0.0));
        for (int x1 = 0; x1 < g.X1; ++x1)
            for (int x2 = 0; x2 < g.X2; ++x2)
                cond[std::size_t(x1)][std::size_t(g.at(x1, x2))] += p2[std::size_t(x2)];
        return cond;
    };
    double best = 0;
    Engine eng = make_engine(opts.seed);
    for (int s = 0; s < std::max(1, opts.starts); ++s) {
        std::vector<double> p1, p2;
        if (s == 0) {
            p1.assign(std::size_t(g.X1), 1.0 / g.X1);
            p2.assign(std::size_t(g.X2), 1.0 / g.X2);
        } else {
            p1 = detail::dirichlet_uniform(eng, std::size_t(g.X1));
            p2 = detail::dirichlet_uniform(eng, std::size_t(g.X2));
        }
        double f = -1;
        for (int round = 0; round < 200; ++round) {
            double f2 = detail::ascend_mixture_entropy(p2, conditionals_given_p1(p1), opts.tol, opts.max_iter);
            f2 = detail::ascend_mixture_entropy(p1, conditionals_given_p2(p2), opts.tol, opts.max_iter);
            if (f2 - f < opts.tol) { f = f2; break; }
            f = f2;
        }
        best = std::max(best, f);
    }
    return best;
}

struct MinUsesResult {
    int n = 0;
    InputDistribution witness;
    double objective = 0;  // best min(H(y|q)/2, H(y|x1,q), H(y|x2,q)) found
    double n_raw = 0;      // log2(U) / objective before the ceiling
};

namespace detail {

struct Theta {
    std::vector<double> w;
    std::vector<std::vector<double>> p1, p2;
};

struct TripleGrads {
    double v[3];       // H(y|q), H(y|x1,q), H(y|x2,q)
    Theta g[3];        // gradients of each component
};

inline Theta zero_like(const Theta& t) {
    Theta z;
    z.w.assign(t.w.size(), 0.0);
    z.p1.assign(t.p1.size(), std::vector<double>(t.p1[0].size(), 0.0));
    z.p2.assign(t.p2.size(), std::vector<double>(t.p2[0].size(), 0.0));
    return z;
}

// Values and analytic gradients of the three conditional entropies at theta.
inline TripleGrads eval_triple(const ChannelFunction& g, const Theta& th) {
    const std::size_t Q = th.w.size(), X1 = std::size_t(g.X1), X2 = std::size_t(g.X2),
                      Y = std::size_t(g.Y);
    TripleGrads out{{0, 0, 0}, {zero_like(th), zero_like(th), zero_like(th)}};
    const double log2e = 1.0 / std::log(2.0);
    std::vector<double> pmf(Y), r1(X1 * Y), r2(X2 * Y);
    for (std::size_t q = 0; q < Q; ++q) {
        const double wq = th.w[q];
        const auto& a = th.p1[q];
        const auto& b = th.p2[q];
        std::fill(pmf.begin(), pmf.end(), 0.0);
        std::fill(r1.begin(), r1.end(), 0.0);
        std::fill(r2.begin(), r2.end(), 0.0);
        for (std::size_t x1 = 0; x1 < X1; ++x1)
            for (std::size_t x2 = 0; x2 < X2; ++x2) {
                const std::size_t y = std::size_t(g.at(int(x1), int(x2)));
                r1[x1 * Y + y] += b[x2];
                r2[x2 * Y + y] += a[x1];
                pmf[y] += a[x1] * b[x2];
            }
        // component 0: H(y|q)
        double h0 = 0;
        for (std::size_t y = 0; y < Y; ++y) h0 -= xlog2x(pmf[y]);
        out.v[0] += wq * h0;
        out.g[0].w[q] = h0;
        for (std::size_t x1 = 0; x1 < X1; ++x1) {
            double d = 0;
            for (std::size_t y = 0; y < Y; ++y)
                if (r1[x1 * Y + y] > 0) d -= r1[x1 * Y + y] * (safe_log2(pmf[y]) + log2e);
            out.g[0].p1[q][x1] = wq * d;
        }
        for (std::size_t x2 = 0; x2 < X2; ++x2) {
            double d = 0;
            for (std::size_t y = 0; y < Y; ++y)
                if (r2[x2 * Y + y] > 0) d -= r2[x2 * Y + y] * (safe_log2(pmf[y]) + log2e);
            out.g[0].p2[q][x2] = wq * d;
        }
        // component 1: H(y|x1,q) = sum_x1 p1(x1) H(r1[x1])
        double h1 = 0;
        std::vector<double> hr1(X1);
        for (std::size_t x1 = 0; x1 < X1; ++x1) {
            double h = 0;
            for (std::size_t y = 0; y < Y; ++y) h -= xlog2x(r1[x1 * Y + y]);
            hr1[x1] = h;
            h1 += a[x1] * h;
        }
        out.v[1] += wq * h1;
        out.g[1].w[q] = h1;
        for (std::size_t x1 = 0; x1 < X1; ++x1) out.g[1].p1[q][x1] = wq * hr1[x1];
        for (std::size_t x2 = 0; x2 < X2; ++x2) {
            double d = 0;
            for (std::size_t x1 = 0; x1 < X1; ++x1) {
                if (a[x1] == 0) continue;
                const std::size_t y = std::size_t(g.at(int(x1), int(x2)));
                d -= a[x1] * (safe_log2(r1[x1 * Y + y]) + log2e);
            }
            out.g[1].p2[q][x2] = wq * d;
        }
        // component 2: H(y|x2,q), symmetric
        double h2 = 0;
        std::vector<double> hr2(X2);
        for (std::size_t x2 = 0; x2 < X2; ++x2) {
            double h = 0;
            for (std::size_t y = 0; y < Y; ++y) h -= xlog2x(r2[x2 * Y + y]);
            hr2[x2] = h;
            h2 += b[x2] * h;
        }
        out.v[2] += wq * h2;
        out.g[2].w[q] = h2;
        for (std::size_t x2 = 0; x2 < X2; ++x2) out.g[2].p2[q][x2] = wq * hr2[x2];
        for (std::size_t x1 = 0; x1 < X1; ++x1) {
            double d = 0;
            for (std::size_t x2 = 0; x2 < X2; ++x2) {
                if (b[x2] == 0) continue;
                const std::size_t y = std::size_t(g.at(int(x1), int(x2)));
                d -= b[x2] * (safe_log2(r2[x2 * Y + y]) + log2e);
            }
            out.g[2].p1[q][x1] = wq * d;
        }
    }
    return out;
}

inline double min_branch(const TripleGrads& t, int& branch) {
    const double m0 = t.v[0] / 2, m1 = t.v[1], m2 = t.v[2];
    branch = 0;
    double m = m0;
    if (m1 < m) { m = m1; branch = 1; }
    if (m2 < m) { m = m2; branch = 2; }
    return m;
}

}  // namespace detail

// Smallest n such that some time-sharing product distribution supports the
// identity function on U messages per user at n channel uses, in the
// asymptotic-rate sense: n = ceil(log2(U) / max_d min(H(y|q)/2, H(y|x1,q),
// H(y|x2,q))). This is a rate calculator, not a finite-blocklength code
// search. The ceiling is taken with 1e-4 slack to absorb optimizer
// tolerance; committed test instances sit far from the misrounding window.
inline MinUsesResult min_uses_identity(const ChannelFunction& g, std::uint64_t U,
                                       const EntropyOpts& opts = {}) {
    if (g.uses != 1) throw std::invalid_argument("min_uses_identity: base channel expected (uses == 1)");
    if (U < 1) throw std::invalid_argument("min_uses_identity: U must be positive");
    const int Q = std::min(g.X1 * g.X2, 64);  // Caratheodory-style cap on time-sharing support
    MinUsesResult best;
    best.objective = -1;
    Engine eng = make_engine(opts.seed ^ 0x9e3779b97f4a7c15ULL);
    for (int s = 0; s < std::max(1, opts.starts); ++s) {
        detail::Theta th;
        if (s == 0) {
            th.w.assign(std::size_t(Q), 1.0 / Q);
            th.p1.assign(std::size_t(Q), std::vector<double>(std::size_t(g.X1), 1.0 / g.X1));
            th.p2.assign(std::size_t(Q), std::vector<double>(std::size_t(g.X2), 1.0 / g.X2));
        } else {
            th.w = detail::dirichlet_uniform(eng, std::size_t(Q));
            th.p1.clear();
            th.p2.clear();
            for (int q = 0; q < Q; ++q) {
                th.p1.push_back(detail::dirichlet_uniform(eng, std::size_t(g.X1)));
                th.p2.push_back(detail::dirichlet_uniform(eng, std::size_t(g.X2)));
            }
        }
        int branch = 0;
        detail::TripleGrads tg = detail::eval_triple(g, th);
        double mu = detail::min_branch(tg, branch);
        for (int it = 0; it < opts.max_iter; ++it) {
            const detail::Theta& gr = tg.g[branch];
            const double scale = branch == 0 ? 0.5 : 1.0;
            double eta = 0.5;
            bool accepted = false;
            for (int bt = 0; bt < 50; ++bt) {
                detail::Theta cand = th;
                for (std::size_t q = 0; q < cand.w.size(); ++q) cand.w[q] += eta * scale * gr.w[q];
                detail::project_simplex(cand.w);
                for (std::size_t q = 0; q < cand.p1.size(); ++q) {
                    for (std::size_t i = 0; i < cand.p1[q].size(); ++i)
                        cand.p1[q][i] += eta * scale * gr.p1[q][i];
                    detail::project_simplex(cand.p1[q]);
                    for (std::size_t i = 0; i < cand.p2[q].size(); ++i)
                        cand.p2[q][i] += eta * scale * gr.p2[q][i];
                    detail::project_simplex(cand.p2[q]);
                }
                detail::TripleGrads cand_tg = detail::eval_triple(g, cand);
                int cand_branch = 0;
                const double cand_mu = detail::min_branch(cand_tg, cand_branch);
                if (cand_mu > mu) {
                    const double gain = cand_mu - mu;
                    th = std::move(cand);
                    tg = std::move(cand_tg);
                    mu = cand_mu;
                    branch = cand_branch;
                    accepted = true;
                    if (gain < opts.tol) it = opts.max_iter;  // converged
                    break;
                }
                eta *= 0.5;
            }
            if (!accepted) break;  // stationary for this start
        }
        if (mu > best.objective) {
            best.objective = mu;
            best.witness.Q = Q;
            best.witness.q_weights = th.w;
            best.witness.p1 = th.p1;
            best.witness.p2 = th.p2;
        }
    }
    if (U == 1) {
        best.n = 0;
        best.n_raw = 0;
        return best;
    }
    if (best.objective < 1e-9)
        throw std::domain_error("min_uses_identity: channel cannot carry the identity function");
    best.n_raw = std::log2(double(U)) / best.objective;
    best.n = int(std::ceil(best.n_raw - 1e-4));
    if (best.n < 1) best.n = 1;
    return best;
}

// log2(W) / H*(G): outputs per use cap, a lower bound on uses needed to
// carry any W-valued result through the channel.
inline double cutset_lower_bound(const ChannelFunction& g, std::int64_t W, const EntropyOpts& opts = {}) {
    if (W < 1) throw std::invalid_argument("cutset_lower_bound: W must be positive");
    const double h = max_output_entropy(g, opts);
    if (h <= 1e-9) throw std::domain_error("cutset_lower_bound: degenerate channel, H*(G) = 0");
    return std::log2(double(W)) / h;
}

// Entropy of a(u1, u2) under independent uniform messages.
inline double target_entropy(const TargetFunction& a) {
    const auto h = a.value_histogram();
    const double total = double(a.U1) * double(a.U2);
    double out = 0;
    for (std::int64_t c : h)
        if (c > 0) out -= (double(c) / total) * std::log2(double(c) / total);
    return out;
}

}  // namespace mismatchlab

#include "kglab/mltest.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kglab/rng.hpp"

namespace kglab {

mpq_class hypergeom_zero_prob(std::uint64_t N, std::uint64_t K, std::uint64_t d) {
    if (K > N || d > N) throw std::invalid_argument("hypergeom_zero_prob: K,d must be <= N");
    if (d > N - K) return 0;
    mpq_class p(binomial(N - K, d), binomial(N, d));
    p.canonicalize();
    return p;
}

namespace {

struct NodeStats {
    std::uint64_t population;  // 2^{m_n}
    std::uint64_t survivors;   // level-ℓ_{n+1} tree nodes extending τ
    std::uint64_t draws;       // 2^{m_n - 1}
};

NodeStats node_stats(const FailureQuery& q) {
    const LevelSchedule& s = *q.schedule;
    if (q.n >= s.horizon()) throw std::invalid_argument("level out of range");
    if (static_cast<std::uint64_t>(q.tau.len) != s.level(q.n))
        throw std::invalid_argument("tau is not at level ℓ_n");
    if (!q.tree->has_node(q.tau)) throw std::invalid_argument("tau not in tree");
    if (q.class_index != 0 && q.class_index != 1)
        throw std::invalid_argument("class index must be 0 or 1");
    const std::uint64_t m = s.gap(q.n);
    return {std::uint64_t{1} << m, q.tree->count_extensions(q.tau, s.level(q.n + 1)),
            std::uint64_t{1} << (m - 1)};
}

}  // namespace

mpq_class failure_prob_at_node(const FailureQuery& q) {
    const NodeStats st = node_stats(q);
    return hypergeom_zero_prob(st.population, st.survivors, st.draws);
}

bool exp_dominates(const mpq_class& exact, const mpq_class& x) {
    for (mpfr_prec_t prec = 128; prec <= 16384; prec *= 2) {
        mpfr_t t, lo, hi;
        mpfr_inits2(prec, t, lo, hi, nullptr);
        // lower bound of e^{-x}: round x up, exp down
        mpfr_set_q(t, x.get_mpq_t(), MPFR_RNDU);
        mpfr_neg(t, t, MPFR_RNDD);
        mpfr_exp(lo, t, MPFR_RNDD);
        // upper bound: round x down, exp up
        mpfr_set_q(t, x.get_mpq_t(), MPFR_RNDD);
        mpfr_neg(t, t, MPFR_RNDU);
        mpfr_exp(hi, t, MPFR_RNDU);
        const bool le_lo = mpfr_cmp_q(lo, exact.get_mpq_t()) >= 0;
        const bool gt_hi = mpfr_cmp_q(hi, exact.get_mpq_t()) < 0;
        mpfr_clears(t, lo, hi, nullptr);
        if (le_lo) return true;
        if (gt_hi) return false;
    }
    // e^{-x} is irrational for rational x != 0, so the brackets separate.
    throw std::runtime_error("exp_dominates: comparison did not resolve");
}

bool chain_step_holds(const mpq_class& q, std::uint64_t m) {
    // 2 q^2 2^{m-1} and q^2 2^m as exact rationals
    mpq_class lhs = 2 * q * q * mpq_class(pow2(m - 1));
    mpq_class rhs = q * q * mpq_class(pow2(m));
    lhs.canonicalize();
    rhs.canonicalize();
    if (lhs != rhs) return false;
    // e^{-a} < 2^{-a} for a > 0 iff e > 2; certify e > 2 with a rounded-down e.
    mpfr_t e;
    mpfr_init2(e, 64);
    mpfr_set_ui(e, 1, MPFR_RNDD);
    mpfr_exp(e, e, MPFR_RNDD);
    const bool ok = mpfr_cmp_ui(e, 2) > 0;
    mpfr_clear(e);
    return ok && rhs > 0;
}

BoundCheck bound_check_at_node(const FailureQuery& q) {
    const LevelSchedule& s = *q.schedule;
    const mpq_class& qn = s.density(q.n);
    BoundCheck r;
    r.exact = failure_prob_at_node(q);
    r.in_regime = q.tree->conditional_density(q.tau) > qn;
    const std::uint64_t m = s.gap(q.n);
    // x = 2 q^2 2^{m-1} = q^2 2^m
    mpq_class x = qn * qn * mpq_class(pow2(m));
    x.canonicalize();
    r.hoeffding_ok = exp_dominates(r.exact, x);
    // floor(q^2 2^m) with q = p/d: (p^2 2^m) / d^2 rounded down
    mpz_class floor_x = qn.get_num() * qn.get_num() * pow2(m) / (qn.get_den() * qn.get_den());
    mpq_class p2(1, pow2(floor_x.get_ui()));
    p2.canonicalize();
    r.power2_ok = r.exact <= p2;
    return r;
}

LevelBound level_failure_bound(const FiniteTree& t, const LevelSchedule& s, std::uint64_t n) {
    if (n >= s.horizon()) throw std::invalid_argument("level out of range");
    LevelBound out;
    const mpq_class& qn = s.density(n);
    for (const Bits& tau : t.nodes_at_level(s.level(n))) {
        if (!(t.conditional_density(tau) > qn)) out.out_of_regime.push_back(tau);
        FailureQuery q{&t, &s, n, tau, 0};
        out.sum_exact += 2 * failure_prob_at_node(q);
    }
    out.sum_exact.canonicalize();
    mpz_class floor_x =
        qn.get_num() * qn.get_num() * pow2(s.gap(n)) / (qn.get_den() * qn.get_den());
    out.paper_bound = mpq_class(pow2(s.level(n) + 1), pow2(floor_x.get_ui()));
    out.paper_bound.canonicalize();
    out.sum_le_paper = out.sum_exact <= out.paper_bound;
    out.threshold_ok = level_bound_strict(s, n);
    return out;
}

bool level_has_failure(const PartitionSystem& ps, const FiniteTree& t, std::uint64_t n) {
    const LevelSchedule& s = ps.schedule;
    for (const Bits& tau : t.nodes_at_level(s.level(n))) {
        const Bits sigma = ps.class_of(tau);
        const auto exts = t.extensions(tau, s.level(n + 1));
        for (int i = 0; i < 2; ++i) {
            const auto& cls = ps.members(sigma.append(i));
            const bool hit = std::any_of(exts.begin(), exts.end(), [&](const Bits& e) {
                return std::binary_search(cls.begin(), cls.end(), e.value);
            });
            if (!hit) return true;
        }
    }
    return false;
}

McFailureResult mc_failure_estimate(const FiniteTree& t, const LevelSchedule& s,
                                    std::uint64_t n, std::uint64_t trials,
                                    std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    McFailureResult r;
    r.trials = trials;
    r.seed = seed;
    const auto nodes = t.nodes_at_level(s.level(n));
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        const PartitionSystem ps = sample_uniform(s, n + 1, mix_seed(seed, trial));
        bool any = false;
        bool cls_fail[2] = {false, false};
        for (const Bits& tau : nodes) {
            const Bits sigma = ps.class_of(tau);
            const auto exts = t.extensions(tau, s.level(n + 1));
            for (int i = 0; i < 2; ++i) {
                const auto& cls = ps.members(sigma.append(i));
                const bool hit = std::any_of(exts.begin(), exts.end(), [&](const Bits& e) {
                    return std::binary_search(cls.begin(), cls.end(), e.value);
                });
                if (!hit) {
                    any = true;
                    cls_fail[i] = true;
                }
            }
        }
        if (any) ++r.hits_any;
        for (int i = 0; i < 2; ++i)
            if (cls_fail[i]) ++r.hits_class[i];
    }
    auto finish = [trials](std::uint64_t hits, double& est, double& se) {
        est = static_cast<double>(hits) / static_cast<double>(trials);
        se = std::sqrt(est * (1.0 - est) / static_cast<double>(trials));
    };
    finish(r.hits_any, r.estimate_any, r.stderr_any);
    for (int i = 0; i < 2; ++i)
        finish(r.hits_class[i], r.estimate_class[i], r.stderr_class[i]);
    return r;
}

std::optional<std::uint64_t> find_n0(const PartitionSystem& ps, const FiniteTree& t) {
    const LevelSchedule& s = ps.schedule;
    const std::uint64_t N = s.horizon();
    if (ps.height < N) throw std::invalid_argument("system height below schedule horizon");
    for (std::uint64_t n = N; n-- > 0;) {
        if (level_has_failure(ps, t, n)) {
            if (n == N - 1) return std::nullopt;
            return n + 1;
        }
    }
    return 0;
}

std::optional<std::uint64_t> find_n0(const std::string& name_bits, const FiniteTree& t,
                                     const LevelSchedule& s) {
    return find_n0(name_to_system(name_bits, s), t);
}

std::optional<StartPoint> find_start(const PartitionSystem& ps, const FiniteTree& t) {
    auto n0 = find_n0(ps, t);
    if (!n0) return std::nullopt;
    const LevelSchedule& s = ps.schedule;
    for (std::uint64_t sig = 0; sig < (std::uint64_t{1} << *n0); ++sig) {
        const Bits sigma(static_cast<int>(*n0), sig);
        for (std::uint64_t tau : ps.members(sigma)) {
            const Bits node(static_cast<int>(s.level(*n0)), tau);
            if (t.has_node(node)) return StartPoint{*n0, sigma, node};
        }
    }
    return std::nullopt;  // empty tree
}

}  // namespace kglab

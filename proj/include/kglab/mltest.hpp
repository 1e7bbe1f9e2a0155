#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <vector>

#include "kglab/bits.hpp"
#include "kglab/partition.hpp"
#include "kglab/tree.hpp"

namespace kglab {

// Probability that a uniform d-subset of an N-population avoids all K
// success states: C(N-K, d)/C(N, d), or 0 when d > N-K.
mpq_class hypergeom_zero_prob(std::uint64_t N, std::uint64_t K, std::uint64_t d);

struct FailureQuery {
    const FiniteTree* tree = nullptr;
    const LevelSchedule* schedule = nullptr;
    std::uint64_t n = 0;
    Bits tau;  // node at level ℓ_n
    int class_index = 0;
};

// Exact probability, over a uniform split of τ's extensions, that class i
// misses every surviving extension. Independent of i by symmetry.
mpq_class failure_prob_at_node(const FailureQuery& q);

struct BoundCheck {
    mpq_class exact;
    bool hoeffding_ok = false;  // exact <= e^{-2 q^2 2^{m-1}}, certified
    bool power2_ok = false;     // exact <= 2^{-floor(q^2 2^m)}, exact arithmetic
    bool in_regime = true;      // density(τ) > q_n held
};

BoundCheck bound_check_at_node(const FailureQuery& q);

// Certified decision of exact <= e^{-x} for rational x, via MPFR directed
// rounding at escalating precision.
bool exp_dominates(const mpq_class& exact, const mpq_class& x);

// The chain step e^{-2q^2 2^{m-1}} < 2^{-q^2 2^m}: exponents agree exactly
// and the step reduces to e > 2.
bool chain_step_holds(const mpq_class& q, std::uint64_t m);

struct LevelBound {
    mpq_class sum_exact;    // Σ_τ 2·failure_prob (union bound over i)
    mpq_class paper_bound;  // 2^{ℓ_n+1} · 2^{-floor(q_n^2 2^{m_n})}
    bool sum_le_paper = false;
    bool threshold_ok = false;  // schedule's level-bound condition vs 2^{-n}
    std::vector<Bits> out_of_regime;  // nodes with density <= q_n
};

LevelBound level_failure_bound(const FiniteTree& t, const LevelSchedule& s, std::uint64_t n);

struct McFailureResult {
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t hits_any = 0;
    std::uint64_t hits_class[2] = {0, 0};
    double estimate_any = 0, stderr_any = 0;
    double estimate_class[2] = {0, 0}, stderr_class[2] = {0, 0};
};

// Samples `trials` uniform height-(n+1) systems and counts those with an
// empty-class failure at level n; trial i is keyed by mix_seed(seed, i), so
// parallel and serial runs agree.
McFailureResult mc_failure_estimate(const FiniteTree& t, const LevelSchedule& s,
                                    std::uint64_t n, std::uint64_t trials,
                                    std::uint64_t seed);

// True iff some node at level ℓ_n has an empty class under ps.
bool level_has_failure(const PartitionSystem& ps, const FiniteTree& t, std::uint64_t n);

// Least n0 with no failures at any level in [n0, N); empty when even the
// last level fails. The system must have height N.
std::optional<std::uint64_t> find_n0(const PartitionSystem& ps, const FiniteTree& t);
std::optional<std::uint64_t> find_n0(const std::string& name_bits, const FiniteTree& t,
                                     const LevelSchedule& s);

struct StartPoint {
    std::uint64_t n0 = 0;
    Bits sigma0;
    Bits tau0;
};

// The Lemma-style start: σ0 = least class at level n0 meeting the tree,
// τ0 = leftmost member of t ∩ D_{σ0}.
std::optional<StartPoint> find_start(const PartitionSystem& ps, const FiniteTree& t);

}  // namespace kglab

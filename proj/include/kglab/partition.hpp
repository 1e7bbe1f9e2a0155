#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kglab/bits.hpp"
#include "kglab/schedule.hpp"

namespace kglab {

// An ℓ-partition system of height h: for every σ with |σ| <= h, a class
// D_σ of level-ℓ_{|σ|} strings. Each node τ in D_σ has its 2^{m_n}
// extensions split into two equal halves, distributed to D_{σ0} and D_{σ1}.
struct PartitionSystem {
    LevelSchedule schedule;
    std::uint64_t height = 0;
    // classes[n][sigma] = sorted members of D_σ, sigma a level-n index.
    std::vector<std::vector<std::vector<std::uint64_t>>> classes;

    const std::vector<std::uint64_t>& members(const Bits& sigma) const {
        return classes.at(static_cast<std::size_t>(sigma.len)).at(sigma.value);
    }

    bool contains(const Bits& sigma, const Bits& tau) const;

    // The unique σ ∈ 2^n with τ ∈ D_σ, where ℓ_n = |τ|.
    Bits class_of(const Bits& tau) const;

    friend bool operator==(const PartitionSystem&, const PartitionSystem&);
};

struct ValidationResult {
    bool ok = true;
    std::string clause;  // first violated clause, empty when ok
    Bits sigma;
    Bits tau;
};

ValidationResult validate(const PartitionSystem& ps);

// |B_h| = Π_{n<h} C(2^{m_n}, 2^{m_n-1})^{2^{ℓ_n}}. Throws when the count
// would exceed max_bits binary digits.
mpz_class count_systems(const LevelSchedule& s, std::uint64_t h,
                        std::uint64_t max_bits = kCountBitCap);

// The naming surjection f. Height is the largest h with u_h <= |bits|; the
// bits in [u_n, u_{n+1}) are read as an integer, reduced mod E_n, and split
// into per-τ subset ranks in the combinatorial number system (per-τ order
// lexicographic within the level).
PartitionSystem name_to_system(const std::string& bits, const LevelSchedule& s);

// Exactly uniform over B_h; deterministic in seed.
PartitionSystem sample_uniform(const LevelSchedule& s, std::uint64_t h, std::uint64_t seed);

// Builds a system from explicit per-node split ranks (test and naming
// backend); chooser(n, tau) must return a rank below C(2^{m_n}, 2^{m_n-1}).
PartitionSystem build_system(const LevelSchedule& s, std::uint64_t h,
                             const std::function<mpz_class(std::size_t, std::uint64_t)>& chooser);

// Colexicographic (combinatorial number system) subset ranking of
// k-subsets of [0, n); rank 0 is {0..k-1}.
std::vector<std::uint64_t> unrank_subset(const mpz_class& rank, std::uint64_t n, std::uint64_t k);
mpz_class rank_subset(const std::vector<std::uint64_t>& subset);

// File format: "h=<height>;schedule=<id>", then lines "σ:τ₁,τ₂,…" for
// every σ with |σ| = h; lower levels are rebuilt by truncation.
void write_system(std::ostream& os, const PartitionSystem& ps);
PartitionSystem read_system(std::istream& is, const LevelSchedule& s);
void write_system_file(const std::string& path, const PartitionSystem& ps);
PartitionSystem read_system_file(const std::string& path, const LevelSchedule& s);

}  // namespace kglab

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "kglab/bits.hpp"
#include "kglab/rat.hpp"
#include "kglab/schedule.hpp"

namespace kglab {

// A prefix-closed finite binary tree, represented by its sorted leaf set at
// top_level. Interior nodes are implicit: a string is a node iff it is a
// prefix of some leaf, so there are no dead interior nodes by construction.
class FiniteTree {
public:
    FiniteTree() = default;
    FiniteTree(std::uint64_t top_level, std::vector<std::uint64_t> leaves);

    static FiniteTree full(std::uint64_t top_level);
    static FiniteTree empty_tree(std::uint64_t top_level) { return FiniteTree(top_level, {}); }

    std::uint64_t top_level() const { return top_level_; }
    const std::vector<std::uint64_t>& leaves() const { return leaves_; }
    bool empty() const { return leaves_.empty(); }
    std::uint64_t leaf_count() const { return leaves_.size(); }

    mpq_class measure() const;  // |leaves| * 2^-L

    bool has_node(const Bits& node) const;

    // Leaves extending `node`, as [begin, end) indices into leaves().
    std::pair<std::size_t, std::size_t> leaf_range(const Bits& node) const;
    std::uint64_t leaves_below(const Bits& node) const;

    // Distinct level-`level` nodes extending `node` (node.len <= level <= L).
    std::vector<Bits> extensions(const Bits& node, std::uint64_t level) const;
    std::uint64_t count_extensions(const Bits& node, std::uint64_t level) const;
    std::vector<Bits> nodes_at_level(std::uint64_t level) const;

    // μ_σ = 2^{|σ|} μ([t] ∩ ⟦σ⟧); 0 for absent nodes.
    mpq_class conditional_density(const Bits& sigma) const;

    friend bool operator==(const FiniteTree&, const FiniteTree&) = default;

private:
    std::uint64_t top_level_ = 0;
    std::vector<std::uint64_t> leaves_;
};

// Fixpoint of removing every node at a schedule level ℓ_n whose conditional
// density is <= q_n, together with all its extensions. In the result every
// surviving level-ℓ_n node has density strictly above q_n; may be empty.
FiniteTree prune_to_density(const FiniteTree& t, const LevelSchedule& s);

// Full tree of depth ℓ_N minus a seeded pseudo-random set of leaves of total
// measure <= budget (budget a dyadic rational below 1).
FiniteTree generate_complement_tree(const LevelSchedule& s, const mpq_class& budget,
                                    std::uint64_t seed);

struct TwoExtensionResult {
    bool ok = true;
    std::optional<Bits> witness;  // first level-ℓ_n node with < 2 extensions
};

// True iff every node at level ℓ_n (n < N) has >= 2 extensions at ℓ_{n+1}.
TwoExtensionResult check_two_extension(const FiniteTree& t, const LevelSchedule& s);

// Line-oriented format: "L=<top_level>" then one leaf per line, sorted.
void write_tree(std::ostream& os, const FiniteTree& t);
FiniteTree read_tree(std::istream& is);
void write_tree_file(const std::string& path, const FiniteTree& t);
FiniteTree read_tree_file(const std::string& path);

}  // namespace kglab

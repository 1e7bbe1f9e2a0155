#include "kglab/tree.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kglab/rng.hpp"

namespace kglab {

namespace {
constexpr std::uint64_t kMaxTopLevel = 24;  // leaf sets are materialized in memory
}

FiniteTree::FiniteTree(std::uint64_t top_level, std::vector<std::uint64_t> leaves)
    : top_level_(top_level), leaves_(std::move(leaves)) {
    if (top_level > kMaxTopLevel) throw std::invalid_argument("top_level too large");
    std::sort(leaves_.begin(), leaves_.end());
    leaves_.erase(std::unique(leaves_.begin(), leaves_.end()), leaves_.end());
    if (!leaves_.empty() && leaves_.back() >> top_level != 0)
        throw std::invalid_argument("leaf exceeds top_level width");
}

FiniteTree FiniteTree::full(std::uint64_t top_level) {
    if (top_level > kMaxTopLevel) throw std::invalid_argument("top_level too large");
    std::vector<std::uint64_t> leaves(std::uint64_t{1} << top_level);
    std::iota(leaves.begin(), leaves.end(), 0);
    return FiniteTree(top_level, std::move(leaves));
}

mpq_class FiniteTree::measure() const {
    mpq_class m(leaf_count(), pow2(top_level_));
    m.canonicalize();
    return m;
}

std::pair<std::size_t, std::size_t> FiniteTree::leaf_range(const Bits& node) const {
    if (static_cast<std::uint64_t>(node.len) > top_level_)
        throw std::invalid_argument("node longer than top_level");
    const std::uint64_t shift = top_level_ - static_cast<std::uint64_t>(node.len);
    const std::uint64_t lo = node.value << shift;
    const std::uint64_t hi = (node.value + 1) << shift;
    auto b = std::lower_bound(leaves_.begin(), leaves_.end(), lo);
    auto e = std::lower_bound(b, leaves_.end(), hi);
    return {static_cast<std::size_t>(b - leaves_.begin()),
            static_cast<std::size_t>(e - leaves_.begin())};
}

std::uint64_t FiniteTree::leaves_below(const Bits& node) const {
    auto [b, e] = leaf_range(node);
    return e - b;
}

bool FiniteTree::has_node(const Bits& node) const { return leaves_below(node) > 0; }

std::vector<Bits> FiniteTree::extensions(const Bits& node, std::uint64_t level) const {
    if (level < static_cast<std::uint64_t>(node.len) || level > top_level_)
        throw std::invalid_argument("bad extension level");
    std::vector<Bits> out;
    auto [b, e] = leaf_range(node);
    const std::uint64_t shift = top_level_ - level;
    std::size_t i = b;
    while (i < e) {
        const std::uint64_t p = leaves_[i] >> shift;
        out.emplace_back(static_cast<int>(level), p);
        const std::uint64_t next = (p + 1) << shift;
        i = static_cast<std::size_t>(
            std::lower_bound(leaves_.begin() + static_cast<std::ptrdiff_t>(i),
                             leaves_.begin() + static_cast<std::ptrdiff_t>(e), next) -
            leaves_.begin());
    }
    return out;
}

std::uint64_t FiniteTree::count_extensions(const Bits& node, std::uint64_t level) const {
    return extensions(node, level).size();
}

std::vector<Bits> FiniteTree::nodes_at_level(std::uint64_t level) const {
    return extensions(Bits::epsilon(), level);
}

mpq_class FiniteTree::conditional_density(const Bits& sigma) const {
    if (static_cast<std::uint64_t>(sigma.len) > top_level_)
        throw std::invalid_argument("node longer than top_level");
    // 2^{|σ|} * count * 2^{-L} = count / 2^{L - |σ|}
    mpq_class d(leaves_below(sigma), pow2(top_level_ - static_cast<std::uint64_t>(sigma.len)));
    d.canonicalize();
    return d;
}

FiniteTree prune_to_density(const FiniteTree& t, const LevelSchedule& s) {
    if (s.level(s.horizon()) != t.top_level())
        throw std::invalid_argument("schedule top level does not match tree");
    std::vector<std::uint64_t> leaves = t.leaves();
    bool changed = true;
    while (changed) {
        changed = false;
        FiniteTree cur(t.top_level(), leaves);
        // Bottom-up over schedule levels; one pass removes every node that
        // is light w.r.t. the pass's starting tree. Removals only shrink
        // densities, so this reaches the same fixpoint as any other order.
        std::vector<bool> drop(leaves.size(), false);
        for (std::size_t n = s.horizon() + 1; n-- > 0;) {
            const std::uint64_t ell = s.level(n);
            const mpq_class& q = s.density(n);
            for (const Bits& node : cur.nodes_at_level(ell)) {
                // density = count / 2^{L-ell} <= q  <=>  count*den <= num*2^{L-ell}
                const mpz_class lhs = mpz_class(cur.leaves_below(node)) * q.get_den();
                const mpz_class rhs = q.get_num() * pow2(t.top_level() - ell);
                if (lhs <= rhs) {
                    auto [b, e] = cur.leaf_range(node);
                    for (std::size_t i = b; i < e; ++i) drop[i] = true;
                    changed = true;
                }
            }
        }
        if (changed) {
            std::vector<std::uint64_t> next;
            next.reserve(leaves.size());
            for (std::size_t i = 0; i < leaves.size(); ++i)
                if (!drop[i]) next.push_back(leaves[i]);
            leaves = std::move(next);
        }
        if (leaves.empty()) break;
    }
    return FiniteTree(t.top_level(), std::move(leaves));
}

FiniteTree generate_complement_tree(const LevelSchedule& s, const mpq_class& budget,
                                    std::uint64_t seed) {
    if (budget >= 1 || budget < 0) throw std::invalid_argument("budget must lie in [0,1)");
    const std::uint64_t L = s.level(s.horizon());
    const std::uint64_t total = std::uint64_t{1} << L;
    // floor(budget * 2^L) leaves get removed.
    mpz_class k = budget.get_num() * pow2(L) / budget.get_den();
    const std::uint64_t removals = k.get_ui();
    std::vector<std::uint64_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(splitmix64(seed));
    for (std::uint64_t i = 0; i < removals; ++i) {
        const std::uint64_t j = i + uniform_u64_below(total - i, rng);
        std::swap(order[i], order[j]);
    }
    std::vector<std::uint64_t> leaves(order.begin() + static_cast<std::ptrdiff_t>(removals),
                                      order.end());
    return FiniteTree(L, std::move(leaves));
}

TwoExtensionResult check_two_extension(const FiniteTree& t, const LevelSchedule& s) {
    if (s.level(s.horizon()) > t.top_level())
        throw std::invalid_argument("schedule deeper than tree");
    for (std::size_t n = 0; n < s.horizon(); ++n) {
        for (const Bits& node : t.nodes_at_level(s.level(n))) {
            if (t.count_extensions(node, s.level(n + 1)) < 2)
                return {false, node};
        }
    }
    return {true, std::nullopt};
}

void write_tree(std::ostream& os, const FiniteTree& t) {
    os << "L=" << t.top_level() << "\n";
    for (std::uint64_t leaf : t.leaves())
        os << Bits(static_cast<int>(t.top_level()), leaf).str() << "\n";
}

FiniteTree read_tree(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("L=", 0) != 0)
        throw std::invalid_argument("tree file must start with L=<top_level>");
    const std::uint64_t L = std::stoull(line.substr(2));
    std::vector<std::uint64_t> leaves;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        Bits b = Bits::parse(line);
        if (static_cast<std::uint64_t>(b.len) != L)
            throw std::invalid_argument("leaf length mismatch: " + line);
        leaves.push_back(b.value);
    }
    return FiniteTree(L, std::move(leaves));
}

void write_tree_file(const std::string& path, const FiniteTree& t) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    write_tree(f, t);
}

FiniteTree read_tree_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    return read_tree(f);
}

}  // namespace kglab

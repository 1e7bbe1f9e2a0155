#include "kglab/partition.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "kglab/rng.hpp"

namespace kglab {

namespace {

constexpr std::uint64_t kMaxSystemLevel = 24;

void check_height(const LevelSchedule& s, std::uint64_t h) {
    if (h > s.horizon()) throw std::invalid_argument("height exceeds schedule horizon");
    if (s.level(h) > kMaxSystemLevel)
        throw std::invalid_argument("partition system level too deep to materialize");
}

bool sorted_contains(const std::vector<std::uint64_t>& v, std::uint64_t x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    return it != v.end() && *it == x;
}

}  // namespace

bool operator==(const PartitionSystem& a, const PartitionSystem& b) {
    return a.height == b.height && a.schedule.levels == b.schedule.levels &&
           a.classes == b.classes;
}

bool PartitionSystem::contains(const Bits& sigma, const Bits& tau) const {
    return sorted_contains(members(sigma), tau.value);
}

Bits PartitionSystem::class_of(const Bits& tau) const {
    auto n = schedule.level_index(static_cast<std::uint64_t>(tau.len));
    if (!n || *n > height)
        throw std::invalid_argument("string length is not a schedule level in range");
    for (std::uint64_t sig = 0; sig < (std::uint64_t{1} << *n); ++sig)
        if (sorted_contains(classes[*n][sig], tau.value)) return Bits(static_cast<int>(*n), sig);
    throw std::logic_error("partition invariant broken: no class contains the string");
}

std::vector<std::uint64_t> unrank_subset(const mpz_class& rank, std::uint64_t n,
                                         std::uint64_t k) {
    std::vector<std::uint64_t> out(k);
    mpz_class r = rank;
    std::uint64_t hi = n;  // exclusive upper bound for the next (largest) element
    for (std::uint64_t i = k; i >= 1; --i) {
        // largest c in [i-1, hi) with C(c, i) <= r
        std::uint64_t lo = i - 1, up = hi - 1;
        while (lo < up) {
            const std::uint64_t mid = lo + (up - lo + 1) / 2;
            if (binomial(mid, i) <= r) lo = mid;
            else up = mid - 1;
        }
        out[i - 1] = lo;
        r -= binomial(lo, i);
        hi = lo;
    }
    if (r != 0) throw std::invalid_argument("subset rank out of range");
    return out;
}

mpz_class rank_subset(const std::vector<std::uint64_t>& subset) {
    mpz_class r = 0;
    for (std::size_t i = 0; i < subset.size(); ++i) r += binomial(subset[i], i + 1);
    return r;
}

PartitionSystem build_system(
    const LevelSchedule& s, std::uint64_t h,
    const std::function<mpz_class(std::size_t, std::uint64_t)>& chooser) {
    check_height(s, h);
    PartitionSystem ps;
    ps.schedule = s;
    ps.height = h;
    ps.classes.resize(h + 1);
    ps.classes[0] = {{0}};
    // assignment[tau] = class index of tau at the current level
    std::vector<std::uint64_t> assign{0};
    for (std::size_t n = 0; n < h; ++n) {
        const std::uint64_t ell = s.level(n);
        const std::uint64_t m = s.gap(n);
        const std::uint64_t half = std::uint64_t{1} << (m - 1);
        ps.classes[n + 1].assign(std::uint64_t{1} << (n + 1), {});
        std::vector<std::uint64_t> next_assign(std::uint64_t{1} << s.level(n + 1));
        for (std::uint64_t tau = 0; tau < (std::uint64_t{1} << ell); ++tau) {
            const std::uint64_t sigma = assign[tau];
            const auto subset = unrank_subset(chooser(n, tau), std::uint64_t{1} << m, half);
            std::vector<bool> in_zero(std::uint64_t{1} << m, false);
            for (std::uint64_t j : subset) in_zero[j] = true;
            for (std::uint64_t j = 0; j < (std::uint64_t{1} << m); ++j) {
                const std::uint64_t child = tau << m | j;
                const std::uint64_t child_sigma = sigma << 1 | (in_zero[j] ? 0 : 1);
                ps.classes[n + 1][child_sigma].push_back(child);
                next_assign[child] = child_sigma;
            }
        }
        assign = std::move(next_assign);
    }
    return ps;
}

ValidationResult validate(const PartitionSystem& ps) {
    const LevelSchedule& s = ps.schedule;
    auto fail = [](std::string clause, Bits sigma, Bits tau) {
        return ValidationResult{false, std::move(clause), sigma, tau};
    };
    if (ps.classes.size() != ps.height + 1 || ps.height > s.horizon())
        return fail("shape", {}, {});
    for (std::size_t n = 0; n <= ps.height; ++n) {
        if (ps.classes[n].size() != (std::uint64_t{1} << n)) return fail("shape", {}, {});
        for (std::uint64_t sig = 0; sig < ps.classes[n].size(); ++sig) {
            const auto& cls = ps.classes[n][sig];
            if (!std::is_sorted(cls.begin(), cls.end()) ||
                std::adjacent_find(cls.begin(), cls.end()) != cls.end())
                return fail("malformed", Bits(static_cast<int>(n), sig), {});
            for (std::uint64_t tau : cls)
                if (s.level(n) < 63 && tau >> s.level(n) != 0)
                    return fail("malformed", Bits(static_cast<int>(n), sig),
                                Bits(static_cast<int>(s.level(n)), tau & ((std::uint64_t{1} << s.level(n)) - 1)));
        }
    }
    if (ps.classes[0] != std::vector<std::vector<std::uint64_t>>{{0}})
        return fail("root", {}, {});
    for (std::size_t n = 0; n <= ps.height; ++n) {
        // the level-n classes partition 2^{ℓ_n}
        std::uint64_t total = 0;
        std::vector<std::uint64_t> all;
        for (const auto& cls : ps.classes[n]) {
            total += cls.size();
            all.insert(all.end(), cls.begin(), cls.end());
        }
        std::sort(all.begin(), all.end());
        if (total != (std::uint64_t{1} << s.level(n)) ||
            std::adjacent_find(all.begin(), all.end()) != all.end())
            return fail("level-partition", Bits(static_cast<int>(n), 0), {});
    }
    for (std::size_t n = 0; n < ps.height; ++n) {
        const std::uint64_t m = s.gap(n);
        const std::uint64_t half = std::uint64_t{1} << (m - 1);
        for (std::uint64_t sig = 0; sig < ps.classes[n].size(); ++sig) {
            const Bits sigma(static_cast<int>(n), sig);
            const auto& left = ps.classes[n + 1][sig << 1];
            const auto& right = ps.classes[n + 1][sig << 1 | 1];
            for (std::uint64_t tp : left)
                if (sorted_contains(right, tp))
                    return fail("disjoint", sigma, Bits(static_cast<int>(s.level(n + 1)), tp));
            for (const auto* side : {&left, &right})
                for (std::uint64_t tp : *side)
                    if (!sorted_contains(ps.classes[n][sig], tp >> m))
                        return fail("prefix", sigma, Bits(static_cast<int>(s.level(n + 1)), tp));
            for (std::uint64_t tau : ps.classes[n][sig]) {
                const auto in_block = [&](const std::vector<std::uint64_t>& v) {
                    auto b = std::lower_bound(v.begin(), v.end(), tau << m);
                    auto e = std::lower_bound(b, v.end(), (tau + 1) << m);
                    return static_cast<std::uint64_t>(e - b);
                };
                if (in_block(left) != half || in_block(right) != half)
                    return fail("equal-split", sigma, Bits(static_cast<int>(s.level(n)), tau));
            }
        }
    }
    return {};
}

mpz_class count_systems(const LevelSchedule& s, std::uint64_t h, std::uint64_t max_bits) {
    if (h > s.horizon()) throw std::invalid_argument("height exceeds schedule horizon");
    mpz_class total = 1;
    for (std::size_t n = 0; n < h; ++n) {
        auto en = level_extension_count(s, n, max_bits);
        if (!en) throw std::overflow_error("count_systems: count exceeds configured bit cap");
        total *= *en;
        if (mpz_sizeinbase(total.get_mpz_t(), 2) > max_bits)
            throw std::overflow_error("count_systems: count exceeds configured bit cap");
    }
    return total;
}

PartitionSystem name_to_system(const std::string& bits, const LevelSchedule& s) {
    const auto& u = s.naming_lengths;
    std::uint64_t h = 0;
    while (h + 1 < u.size() && u[h + 1] <= bits.size() && h + 1 <= s.horizon()) ++h;
    if (h == 0) throw std::invalid_argument("name shorter than u_1");
    // Per-level, per-τ subset ranks via mixed-radix decomposition.
    std::vector<std::vector<mpz_class>> ranks(h);
    for (std::size_t n = 0; n < h; ++n) {
        mpz_class v = 0;
        for (std::uint64_t i = u[n]; i < u[n + 1]; ++i) {
            const char c = bits[i];
            if (c != '0' && c != '1') throw std::invalid_argument("name must be binary");
            v = v * 2 + (c - '0');
        }
        const mpz_class en = *level_extension_count(s, n);
        v %= en;
        const mpz_class cn = *split_count(s, n);
        ranks[n].resize(std::uint64_t{1} << s.level(n));
        for (auto& r : ranks[n]) {
            r = v % cn;
            v /= cn;
        }
    }
    return build_system(s, h, [&](std::size_t n, std::uint64_t tau) { return ranks[n][tau]; });
}

PartitionSystem sample_uniform(const LevelSchedule& s, std::uint64_t h, std::uint64_t seed) {
    check_height(s, h);
    std::mt19937_64 rng(splitmix64(seed));
    std::vector<mpz_class> counts(h);
    for (std::size_t n = 0; n < h; ++n) {
        auto c = split_count(s, n);
        if (!c) throw std::overflow_error("sample_uniform: split count infeasible");
        counts[n] = *c;
    }
    return build_system(s, h, [&](std::size_t n, std::uint64_t) {
        return uniform_below(counts[n], rng);
    });
}

void write_system(std::ostream& os, const PartitionSystem& ps) {
    os << "h=" << ps.height << ";schedule=" << ps.schedule.id() << "\n";
    const int ell = static_cast<int>(ps.schedule.level(ps.height));
    for (std::uint64_t sig = 0; sig < ps.classes[ps.height].size(); ++sig) {
        os << Bits(static_cast<int>(ps.height), sig).str() << ":";
        const auto& cls = ps.classes[ps.height][sig];
        for (std::size_t i = 0; i < cls.size(); ++i)
            os << (i ? "," : "") << Bits(ell, cls[i]).str();
        os << "\n";
    }
}

PartitionSystem read_system(std::istream& is, const LevelSchedule& s) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("h=", 0) != 0)
        throw std::invalid_argument("system file must start with h=<height>");
    const auto semi = line.find(';');
    if (semi == std::string::npos || line.compare(semi, 10, ";schedule=") != 0)
        throw std::invalid_argument("system file header missing schedule id");
    const std::uint64_t h = std::stoull(line.substr(2, semi - 2));
    const std::string id = line.substr(semi + 10);
    if (id != s.id())
        throw std::invalid_argument("system file schedule id mismatch: " + id);
    check_height(s, h);

    PartitionSystem ps;
    ps.schedule = s;
    ps.height = h;
    ps.classes.resize(h + 1);
    for (std::size_t n = 0; n <= h; ++n)
        ps.classes[n].assign(std::uint64_t{1} << n, {});
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("bad system line: " + line);
        const Bits sigma = Bits::parse(line.substr(0, colon));
        if (static_cast<std::uint64_t>(sigma.len) != h)
            throw std::invalid_argument("system file lists non-top class: " + line);
        std::string rest = line.substr(colon + 1);
        std::stringstream ss(rest);
        std::string item;
        auto& cls = ps.classes[h][sigma.value];
        if (h == 0 && rest.empty()) {
            cls.push_back(0);
        } else {
            while (std::getline(ss, item, ',')) {
                const Bits tau = Bits::parse(item);
                if (static_cast<std::uint64_t>(tau.len) != s.level(h))
                    throw std::invalid_argument("member has wrong length: " + item);
                cls.push_back(tau.value);
            }
        }
        std::sort(cls.begin(), cls.end());
    }
    // Lower levels are the truncations of the top-level classes.
    for (std::size_t n = h; n-- > 0;) {
        const std::uint64_t m = s.gap(n);
        for (std::uint64_t sig = 0; sig < ps.classes[n].size(); ++sig) {
            std::vector<std::uint64_t> up;
            for (int child = 0; child < 2; ++child) {
                for (std::uint64_t tp : ps.classes[n + 1][sig << 1 | child])
                    up.push_back(tp >> m);
            }
            std::sort(up.begin(), up.end());
            up.erase(std::unique(up.begin(), up.end()), up.end());
            ps.classes[n][sig] = std::move(up);
        }
    }
    return ps;
}

void write_system_file(const std::string& path, const PartitionSystem& ps) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    write_system(f, ps);
}

PartitionSystem read_system_file(const std::string& path, const LevelSchedule& s) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    return read_system(f, s);
}

}  // namespace kglab

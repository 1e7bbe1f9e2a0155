#include "kglab/codec.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <stdexcept>

namespace kglab {

namespace {

int parse_bit(char c) {
    if (c != '0' && c != '1') throw std::invalid_argument("payload must be binary");
    return c - '0';
}

std::uint64_t name_bits_at(const LevelSchedule& s, std::size_t n) {
    return n < s.naming_lengths.size() ? s.naming_lengths[n] : 0;
}

}  // namespace

EncodeResult encode(const std::string& z_bits, const PartitionSystem& ps,
                    const FiniteTree& t, const Bits& sigma0, const Bits& tau0) {
    const LevelSchedule& s = ps.schedule;
    const std::size_t n0 = static_cast<std::size_t>(sigma0.len);
    if (n0 + z_bits.size() > ps.height)
        throw std::invalid_argument("payload exceeds partition system height");
    if (s.level(n0 + z_bits.size()) > t.top_level())
        throw std::invalid_argument("payload exceeds tree depth");
    if (static_cast<std::uint64_t>(tau0.len) != s.level(n0))
        throw std::invalid_argument("tau0 must sit at level ℓ_{|sigma0|}");
    if (!t.has_node(tau0) || !ps.contains(sigma0, tau0))
        throw std::invalid_argument("tau0 must lie in the tree and in D_{sigma0}");

    EncodeResult res;
    Bits sigma = sigma0;
    Bits tau = tau0;
    for (std::size_t k = 0; k < z_bits.size(); ++k) {
        const int bit = parse_bit(z_bits[k]);
        const std::size_t n = n0 + k;
        const Bits child_sigma = sigma.append(bit);
        const auto& cls = ps.members(child_sigma);
        std::optional<Bits> pick;
        std::uint64_t candidates = 0;
        for (const Bits& ext : t.extensions(tau, s.level(n + 1))) {
            if (std::binary_search(cls.begin(), cls.end(), ext.value)) {
                ++candidates;
                if (!pick) pick = ext;  // extensions come back in lex order
            }
        }
        if (!pick) {
            res.failure = CodingFailure{k, bit, sigma, tau};
            res.y = tau;
            return res;
        }
        res.trace.steps.push_back({k, sigma, *pick, bit, candidates});
        sigma = child_sigma;
        tau = *pick;
    }
    res.y = tau;
    res.trace.oracle_use = {name_bits_at(s, n0 + z_bits.size()),
                           s.level(n0 + z_bits.size())};
    return res;
}

std::string decode(const PartitionSystem& ps, const Bits& y_prefix, const Bits& sigma0,
                   const Bits& tau0) {
    const LevelSchedule& s = ps.schedule;
    const std::size_t n0 = static_cast<std::size_t>(sigma0.len);
    if (!tau0.is_prefix_of(y_prefix))
        throw std::invalid_argument("tau0 must be a prefix of y");
    auto end_level = s.level_index(static_cast<std::uint64_t>(y_prefix.len));
    if (!end_level || *end_level < n0 || *end_level > ps.height)
        throw std::invalid_argument(
            "y length " + std::to_string(y_prefix.len) +
            " is not a schedule level ℓ_{|sigma0|+r} within the system height");
    std::string z;
    Bits sigma = sigma0;
    for (std::size_t n = n0; n < *end_level; ++n) {
        const Bits w = y_prefix.prefix(static_cast<int>(s.level(n + 1)));
        int found = -1;
        for (int i = 0; i < 2; ++i) {
            if (ps.contains(sigma.append(i), w)) {
                if (found >= 0)
                    throw std::logic_error("partition invariant broken: ambiguous class");
                found = i;
            }
        }
        if (found < 0)
            throw std::invalid_argument("y is inconsistent with the system at level " +
                                        std::to_string(n));
        z.push_back(static_cast<char>('0' + found));
        sigma = sigma.append(found);
    }
    return z;
}

EncodeResult kg_encode(const std::string& z_bits, const FiniteTree& t,
                       const LevelSchedule& s) {
    if (z_bits.size() > s.horizon())
        throw std::invalid_argument("payload exceeds schedule horizon");
    EncodeResult res;
    Bits y = Bits::epsilon();
    for (std::size_t n = 0; n < z_bits.size(); ++n) {
        const int bit = parse_bit(z_bits[n]);
        auto exts = t.extensions(y, s.level(n + 1));
        if (exts.size() < 2)
            throw std::invalid_argument("two-extension property fails at level " +
                                        std::to_string(n));
        const Bits pick = bit == 0 ? exts.front() : exts.back();
        res.trace.steps.push_back({n, y, pick, bit, exts.size()});
        y = pick;
    }
    res.y = y;
    res.trace.oracle_use = {0, s.level(z_bits.size())};
    return res;
}

std::string kg_decode(const Bits& y_prefix, const FiniteTree& t, const LevelSchedule& s) {
    auto end_level = s.level_index(static_cast<std::uint64_t>(y_prefix.len));
    if (!end_level)
        throw std::invalid_argument("y length is not a schedule level");
    if (!t.has_node(y_prefix))
        throw std::invalid_argument("y is not a node of the tree");
    std::string z;
    for (std::size_t n = 0; n < *end_level; ++n) {
        const Bits w = y_prefix.prefix(static_cast<int>(s.level(n + 1)));
        auto exts = t.extensions(y_prefix.prefix(static_cast<int>(s.level(n))),
                                 s.level(n + 1));
        if (w == exts.front()) z.push_back('0');
        else if (w == exts.back()) z.push_back('1');
        else throw NotBoundaryError(n);
    }
    return z;
}

std::string trace_to_json(const CodecTrace& trace) {
    nlohmann::json j;
    j["steps"] = nlohmann::json::array();
    for (const auto& st : trace.steps) {
        j["steps"].push_back({{"k", st.k},
                              {"sigma", st.sigma.str()},
                              {"tau", st.tau.str()},
                              {"class_bit", st.class_bit},
                              {"candidate_count", st.candidate_count}});
    }
    j["oracle_use"] = {{"name_bits", trace.oracle_use.name_bits},
                       {"payload_bits", trace.oracle_use.payload_bits}};
    return j.dump(2);
}

}  // namespace kglab

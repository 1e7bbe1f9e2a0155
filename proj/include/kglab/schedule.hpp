#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kglab/rat.hpp"

namespace kglab {

enum class ScheduleKind { Exponential, NLogN, ScaledNLogN, Custom };
enum class DensityKind { InverseSquare, Custom };

// Refuse materializing counts whose binary size exceeds this.
inline constexpr std::uint64_t kCountBitCap = std::uint64_t{1} << 20;

// Slack bits added per level to the naming lengths u_n.
inline constexpr std::uint64_t kNamingSlack = 2;

// Level structure ℓ_0..ℓ_N with gaps m_n = ℓ_{n+1} - ℓ_n, per-level
// densities q_n in (0,1), and naming lengths u_n for the string-naming of
// partition systems. naming_lengths may be shorter than levels: it stops
// where the per-level choice count blows past kCountBitCap.
struct LevelSchedule {
    ScheduleKind kind = ScheduleKind::Custom;
    std::uint64_t scale = 1;  // ScaledNLogN only
    std::vector<std::uint64_t> levels;
    std::vector<mpq_class> densities;
    std::vector<std::uint64_t> naming_lengths;

    std::size_t horizon() const { return levels.size() - 1; }  // N
    std::uint64_t level(std::size_t n) const { return levels.at(n); }
    std::uint64_t gap(std::size_t n) const { return levels.at(n + 1) - levels.at(n); }
    const mpq_class& density(std::size_t n) const { return densities.at(n); }

    // Index n with ℓ_n == len, if len is a schedule level.
    std::optional<std::size_t> level_index(std::uint64_t len) const;

    std::string kind_str() const;
    std::string id() const;  // e.g. "exponential[0,2,4,8,16]"
};

struct ScheduleSpec {
    ScheduleKind kind = ScheduleKind::Exponential;
    std::uint64_t n_max = 1;
    std::uint64_t scale = 6;  // ScaledNLogN coefficient c
    std::vector<std::uint64_t> custom_levels;
    DensityKind density = DensityKind::InverseSquare;
    std::vector<mpq_class> custom_densities;
    std::uint64_t naming_slack = kNamingSlack;
};

LevelSchedule make_schedule(const ScheduleSpec& spec);
LevelSchedule make_schedule(ScheduleKind kind, std::uint64_t n_max,
                            DensityKind density = DensityKind::InverseSquare,
                            std::uint64_t scale = 6);
LevelSchedule make_custom_schedule(std::vector<std::uint64_t> levels,
                                   std::vector<mpq_class> densities);

// Number of ways to split one node's 2^{m_n} extensions into two equal
// halves: C(2^{m_n}, 2^{m_n - 1}). Empty when infeasibly large.
std::optional<mpz_class> split_count(const LevelSchedule& s, std::size_t n,
                                     std::uint64_t max_bits = kCountBitCap);

// E_n = split_count(n) ^ 2^{ℓ_n}: independent split choices across all
// level-ℓ_n strings. Empty when the result would exceed max_bits bits.
std::optional<mpz_class> level_extension_count(const LevelSchedule& s, std::size_t n,
                                               std::uint64_t max_bits = kCountBitCap);

// Decides q^2 * 2^m > a + b*log2(n), fully in integer arithmetic: the
// log2 only ever enters through comparisons of 2^k against powers of n.
bool exceeds_loglinear(const mpq_class& q, std::uint64_t m, const mpz_class& a,
                       std::uint64_t b, std::uint64_t n);

// q_n^2 * 2^{m_n} > ℓ_n + 1 + n  (rearranged 2^{ℓ_n+1} 2^{-q_n^2 2^{m_n}} < 2^{-n})
bool level_bound_strict(const LevelSchedule& s, std::size_t n);

// q_n^2 * 2^{m_n} > ℓ_n + 1 + 2 log2 n  (the 1/n^2 summability variant)
bool level_bound_relaxed(const LevelSchedule& s, std::size_t n);

// m_n > 5 log2 n, i.e. 2^{m_n} > n^5
bool gap_bound(const LevelSchedule& s, std::size_t n);

struct ConvergenceRow {
    std::uint64_t n = 0;
    std::uint64_t ell = 0;
    std::uint64_t m = 0;
    mpq_class sum_gap_inv;  // Σ_{k<=n} 2^{-m_k}
    mpq_class sum_density;  // Σ_{k<=n} q_k
    bool strict_ok = false;
    bool relaxed_ok = false;
    bool gap_ok = false;
};

// One row per n in [0, N); deterministic and pure.
std::vector<ConvergenceRow> convergence_report(const LevelSchedule& s);

std::string schedule_to_json(const LevelSchedule& s);
LevelSchedule schedule_from_json(const std::string& text);

}  // namespace kglab

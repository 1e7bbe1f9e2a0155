#include "kglab/schedule.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace kglab {

namespace {

std::uint64_t ceil_log2_u64(std::uint64_t n) {
    std::uint64_t k = 0;
    while ((std::uint64_t{1} << k) < n) ++k;
    return k;
}

std::uint64_t nlogn_level(std::uint64_t n, std::uint64_t c) {
    // ℓ_0 = 0, ℓ_1 = 1 to keep strict monotonicity where n*ceil(log2 n) degenerates.
    if (n == 0) return 0;
    if (n == 1) return 1;
    return c * n * ceil_log2_u64(n);
}

void check_invariants(const LevelSchedule& s) {
    if (s.levels.size() < 2) throw std::invalid_argument("schedule needs at least two levels");
    if (s.levels.front() != 0) throw std::invalid_argument("schedule must start at level 0");
    for (std::size_t i = 0; i + 1 < s.levels.size(); ++i)
        if (s.levels[i + 1] <= s.levels[i])
            throw std::invalid_argument("schedule levels must be strictly increasing");
    if (s.densities.size() != s.levels.size())
        throw std::invalid_argument("densities must match levels in length");
    for (const auto& q : s.densities)
        if (q <= 0 || q >= 1) throw std::invalid_argument("densities must lie in (0,1)");
}

void fill_naming_lengths(LevelSchedule& s, std::uint64_t slack) {
    s.naming_lengths = {0};
    for (std::size_t n = 0; n < s.horizon(); ++n) {
        auto en = level_extension_count(s, n);
        if (!en) break;
        s.naming_lengths.push_back(s.naming_lengths.back() + ceil_log2(*en) + slack);
    }
}

}  // namespace

std::optional<std::size_t> LevelSchedule::level_index(std::uint64_t len) const {
    auto it = std::lower_bound(levels.begin(), levels.end(), len);
    if (it == levels.end() || *it != len) return std::nullopt;
    return static_cast<std::size_t>(it - levels.begin());
}

std::string LevelSchedule::kind_str() const {
    switch (kind) {
        case ScheduleKind::Exponential: return "exponential";
        case ScheduleKind::NLogN: return "nlogn";
        case ScheduleKind::ScaledNLogN: return "nlogn*" + std::to_string(scale);
        case ScheduleKind::Custom: return "custom";
    }
    return "?";
}

std::string LevelSchedule::id() const {
    std::ostringstream os;
    os << kind_str() << "[";
    for (std::size_t i = 0; i < levels.size(); ++i) os << (i ? "," : "") << levels[i];
    os << "]";
    return os.str();
}

LevelSchedule make_schedule(const ScheduleSpec& spec) {
    if (spec.n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    LevelSchedule s;
    s.kind = spec.kind;
    const std::uint64_t n_max = spec.kind == ScheduleKind::Custom
                                    ? spec.custom_levels.size() - 1
                                    : spec.n_max;
    switch (spec.kind) {
        case ScheduleKind::Exponential:
            s.levels.push_back(0);
            for (std::uint64_t n = 1; n <= n_max; ++n)
                s.levels.push_back(std::uint64_t{1} << n);
            break;
        case ScheduleKind::NLogN:
            for (std::uint64_t n = 0; n <= n_max; ++n)
                s.levels.push_back(nlogn_level(n, 1));
            break;
        case ScheduleKind::ScaledNLogN:
            if (spec.scale < 1) throw std::invalid_argument("scale must be >= 1");
            s.scale = spec.scale;
            for (std::uint64_t n = 0; n <= n_max; ++n)
                s.levels.push_back(nlogn_level(n, spec.scale));
            break;
        case ScheduleKind::Custom:
            if (spec.custom_levels.empty())
                throw std::invalid_argument("custom schedule needs levels");
            s.levels = spec.custom_levels;
            break;
    }
    if (spec.density == DensityKind::InverseSquare) {
        // q_n = 1/(n+1)^2; q_0 would be 1, clamp it to 1/2.
        s.densities.emplace_back(1, 2);
        for (std::uint64_t n = 1; n < s.levels.size(); ++n)
            s.densities.emplace_back(1, (n + 1) * (n + 1));
    } else {
        s.densities = spec.custom_densities;
    }
    check_invariants(s);
    fill_naming_lengths(s, spec.naming_slack);
    return s;
}

LevelSchedule make_schedule(ScheduleKind kind, std::uint64_t n_max, DensityKind density,
                            std::uint64_t scale) {
    ScheduleSpec spec;
    spec.kind = kind;
    spec.n_max = n_max;
    spec.density = density;
    spec.scale = scale;
    return make_schedule(spec);
}

LevelSchedule make_custom_schedule(std::vector<std::uint64_t> levels,
                                   std::vector<mpq_class> densities) {
    ScheduleSpec spec;
    spec.kind = ScheduleKind::Custom;
    spec.custom_levels = std::move(levels);
    spec.density = DensityKind::Custom;
    spec.custom_densities = std::move(densities);
    return make_schedule(spec);
}

std::optional<mpz_class> split_count(const LevelSchedule& s, std::size_t n,
                                     std::uint64_t max_bits) {
    const std::uint64_t m = s.gap(n);
    if (m >= 63 || (std::uint64_t{1} << m) > max_bits) return std::nullopt;
    const std::uint64_t pop = std::uint64_t{1} << m;
    return binomial(pop, pop / 2);
}

std::optional<mpz_class> level_extension_count(const LevelSchedule& s, std::size_t n,
                                               std::uint64_t max_bits) {
    auto c = split_count(s, n, max_bits);
    if (!c) return std::nullopt;
    const std::uint64_t ell = s.level(n);
    if (ell >= 63) return std::nullopt;
    const std::uint64_t copies = std::uint64_t{1} << ell;
    const std::uint64_t cbits = mpz_sizeinbase(c->get_mpz_t(), 2);
    if (cbits > max_bits / copies) return std::nullopt;
    mpz_class e;
    mpz_pow_ui(e.get_mpz_t(), c->get_mpz_t(), copies);
    return e;
}

bool exceeds_loglinear(const mpq_class& q, std::uint64_t m, const mpz_class& a,
                       std::uint64_t b, std::uint64_t n) {
    mpq_class qc = q;
    qc.canonicalize();
    const mpz_class& p = qc.get_num();
    const mpz_class& d = qc.get_den();
    // L = p^2 2^m - a d^2; condition is L > b d^2 log2(n).
    mpz_class lhs = p * p * pow2(m) - a * d * d;
    if (b == 0 || n <= 1) return lhs > 0;
    if ((n & (n - 1)) == 0) {
        std::uint64_t j = 0;
        while ((std::uint64_t{1} << j) < n) ++j;
        return lhs > b * d * d * j;
    }
    if (lhs <= 0) return false;
    const mpz_class e = b * d * d;
    // Bracket log2(n) by r/t <= log2(n) < (r+1)/t with 2^r <= n^t < 2^{r+1};
    // the bracket is strict on both sides since n is not a power of two.
    for (std::uint64_t t = 16; t <= (std::uint64_t{1} << 22); t *= 4) {
        mpz_class nt;
        mpz_ui_pow_ui(nt.get_mpz_t(), n, t);
        const std::uint64_t r = mpz_sizeinbase(nt.get_mpz_t(), 2) - 1;
        if (lhs * t >= e * (r + 1)) return true;
        if (lhs * t <= e * r) return false;
    }
    throw std::runtime_error("exceeds_loglinear: comparison did not resolve");
}

bool level_bound_strict(const LevelSchedule& s, std::size_t n) {
    return exceeds_loglinear(s.density(n), s.gap(n), mpz_class(s.level(n) + 1 + n), 0, 0);
}

bool level_bound_relaxed(const LevelSchedule& s, std::size_t n) {
    return exceeds_loglinear(s.density(n), s.gap(n), mpz_class(s.level(n) + 1), 2, n);
}

bool gap_bound(const LevelSchedule& s, std::size_t n) {
    if (n <= 1) return s.gap(n) >= 1;
    mpz_class n5;
    mpz_ui_pow_ui(n5.get_mpz_t(), n, 5);
    return pow2(s.gap(n)) > n5;
}

std::vector<ConvergenceRow> convergence_report(const LevelSchedule& s) {
    std::vector<ConvergenceRow> rows;
    mpq_class sum_gap = 0;
    mpq_class sum_q = 0;
    for (std::size_t n = 0; n < s.horizon(); ++n) {
        ConvergenceRow row;
        row.n = n;
        row.ell = s.level(n);
        row.m = s.gap(n);
        sum_gap += pow2_inv(row.m);
        sum_q += s.density(n);
        row.sum_gap_inv = sum_gap;
        row.sum_density = sum_q;
        row.strict_ok = level_bound_strict(s, n);
        row.relaxed_ok = level_bound_relaxed(s, n);
        row.gap_ok = gap_bound(s, n);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string schedule_to_json(const LevelSchedule& s) {
    nlohmann::json j;
    j["kind"] = s.kind_str();
    j["levels"] = s.levels;
    std::vector<std::string> dens;
    for (const auto& q : s.densities) dens.push_back(rat_str(q));
    j["densities"] = dens;
    j["naming_lengths"] = s.naming_lengths;
    return j.dump(2);
}

LevelSchedule schedule_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    std::vector<mpq_class> dens;
    for (const auto& d : j.at("densities")) dens.push_back(parse_rat(d.get<std::string>()));
    LevelSchedule s = make_custom_schedule(j.at("levels").get<std::vector<std::uint64_t>>(),
                                           std::move(dens));
    const std::string kind = j.value("kind", "custom");
    if (kind == "exponential") s.kind = ScheduleKind::Exponential;
    else if (kind == "nlogn") s.kind = ScheduleKind::NLogN;
    else if (kind.rfind("nlogn*", 0) == 0) {
        s.kind = ScheduleKind::ScaledNLogN;
        s.scale = std::stoull(kind.substr(6));
    }
    return s;
}

}  // namespace kglab

#include <doctest.h>

#include <random>

#include "kglab/codec.hpp"
#include "kglab/mltest.hpp"
#include "support/enumerate.hpp"

using namespace kglab;
using kglab::testing::enumerate_systems;

namespace {

LevelSchedule tiny() {
    return make_custom_schedule({0, 1, 2},
                                {mpq_class(1, 3), mpq_class(1, 2), mpq_class(1, 2)});
}

PartitionSystem identity_system() {
    PartitionSystem ps;
    ps.schedule = tiny();
    ps.height = 2;
    ps.classes = {{{0}}, {{0}, {1}}, {{0b00}, {0b01}, {0b10}, {0b11}}};
    return ps;
}

}  // namespace

TEST_CASE("encode hand trace on the identity system") {
    auto ps = identity_system();
    auto full = FiniteTree::full(2);
    auto r = encode("10", ps, full, Bits::epsilon(), Bits::epsilon());
    REQUIRE(r.ok());
    CHECK(r.y == Bits::parse("10"));
    REQUIRE(r.trace.steps.size() == 2);
    CHECK(r.trace.steps[0].class_bit == 1);
    CHECK(r.trace.steps[0].tau == Bits::parse("1"));
    CHECK(r.trace.steps[1].tau == Bits::parse("10"));
    CHECK(r.trace.oracle_use.name_bits == 7);    // u_2
    CHECK(r.trace.oracle_use.payload_bits == 2); // ℓ_2
    CHECK(decode(ps, r.y, Bits::epsilon(), Bits::epsilon()) == "10");
}

TEST_CASE("empty payload encodes to the start node") {
    auto ps = identity_system();
    auto r = encode("", ps, FiniteTree::full(2), Bits::epsilon(), Bits::epsilon());
    REQUIRE(r.ok());
    CHECK(r.y == Bits::epsilon());
    CHECK(r.trace.steps.empty());
    CHECK(decode(ps, Bits::epsilon(), Bits::epsilon(), Bits::epsilon()).empty());
}

TEST_CASE("a pruned-away class yields a coding failure, not an exception") {
    auto ps = identity_system();
    FiniteTree t(2, {0b00, 0b01});  // only the subtree below 0 survives
    auto r = encode("10", ps, t, Bits::epsilon(), Bits::epsilon());
    REQUIRE_FALSE(r.ok());
    CHECK(r.failure->step == 0);
    CHECK(r.failure->class_bit == 1);
    CHECK(r.failure->sigma == Bits::epsilon());
    CHECK(r.failure->tau == Bits::epsilon());
    // The other payload still goes through.
    CHECK(encode("01", ps, t, Bits::epsilon(), Bits::epsilon()).ok());
}

TEST_CASE("exhaustive round-trip over every system and payload") {
    auto s = tiny();
    auto full = FiniteTree::full(2);
    for (const auto& ps : enumerate_systems(s, 2)) {
        for (std::uint64_t w = 0; w < 4; ++w) {
            const std::string z{char('0' + (w >> 1)), char('0' + (w & 1))};
            auto r = encode(z, ps, full, Bits::epsilon(), Bits::epsilon());
            REQUIRE(r.ok());
            CHECK(decode(ps, r.y, Bits::epsilon(), Bits::epsilon()) == z);
        }
    }
}

TEST_CASE("round-trip from a mid-tree start point") {
    auto s = make_custom_schedule(
        {0, 2, 4}, {mpq_class(1, 3), mpq_class(1, 4), mpq_class(1, 4)});
    auto full = FiniteTree::full(4);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto ps = sample_uniform(s, 2, seed);
        auto start = find_start(ps, full);
        REQUIRE(start.has_value());
        auto r = encode("1", ps, full, start->sigma0, start->tau0);
        REQUIRE(r.ok());
        CHECK(decode(ps, r.y, start->sigma0, start->tau0) == "1");
    }
}

TEST_CASE("decode rejects a y that leaves the system") {
    auto ps = identity_system();
    CHECK_THROWS_AS(decode(ps, Bits::parse("101"), Bits::epsilon(), Bits::epsilon()),
                    std::invalid_argument);
}

TEST_CASE("kg encode and decode on the full tree") {
    auto s = tiny();
    auto full = FiniteTree::full(2);
    auto r = kg_encode("10", full, s);
    REQUIRE(r.ok());
    CHECK(r.y == Bits::parse("10"));  // rightmost then leftmost
    CHECK(kg_decode(r.y, full, s) == "10");
    CHECK(kg_encode("00", full, s).y == Bits::parse("00"));
    CHECK(kg_encode("11", full, s).y == Bits::parse("11"));
}

TEST_CASE("kg decode rejects interior nodes") {
    auto s = make_custom_schedule({0, 2}, {mpq_class(1, 3), mpq_class(1, 4)});
    auto full = FiniteTree::full(2);
    CHECK_THROWS_AS(kg_decode(Bits::parse("01"), full, s), NotBoundaryError);
    try {
        kg_decode(Bits::parse("10"), full, s);
        FAIL("expected NotBoundaryError");
    } catch (const NotBoundaryError& e) {
        CHECK(e.level == 0);
    }
}

TEST_CASE("kg encode requires a branching tree") {
    auto s = tiny();
    FiniteTree lone(2, {0b00});
    CHECK_THROWS(kg_encode("0", lone, s));
}

TEST_CASE("kg round-trip on pruned random trees") {
    auto s = make_custom_schedule(
        {0, 2, 4}, {mpq_class(1, 4), mpq_class(1, 4), mpq_class(1, 4)});
    std::mt19937_64 rng(17);
    int tested = 0;
    while (tested < 50) {
        std::vector<std::uint64_t> leaves;
        for (std::uint64_t i = 0; i < 16; ++i)
            if (rng() % 4) leaves.push_back(i);
        auto p = prune_to_density(FiniteTree(4, leaves), s);
        if (p.empty()) continue;
        ++tested;
        // q_n >= 2^-m_n, so every pruned node branches at the next level
        for (std::uint64_t w = 0; w < 4; ++w) {
            const std::string z{char('0' + (w >> 1)), char('0' + (w & 1))};
            auto r = kg_encode(z, p, s);
            REQUIRE(r.ok());
            CHECK(kg_decode(r.y, p, s) == z);
        }
    }
}

TEST_CASE("trace serialization carries the oracle accounting") {
    auto ps = identity_system();
    auto r = encode("10", ps, FiniteTree::full(2), Bits::epsilon(), Bits::epsilon());
    const std::string j = trace_to_json(r.trace);
    CHECK(j.find("\"name_bits\"") != std::string::npos);
    CHECK(j.find("\"payload_bits\"") != std::string::npos);
    CHECK(j.find("7") != std::string::npos);
}

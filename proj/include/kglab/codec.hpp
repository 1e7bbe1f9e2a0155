#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kglab/bits.hpp"
#include "kglab/partition.hpp"
#include "kglab/tree.hpp"

namespace kglab {

struct TraceStep {
    std::uint64_t k = 0;
    Bits sigma;  // before appending the class bit
    Bits tau;    // the chosen extension
    int class_bit = 0;
    std::uint64_t candidate_count = 0;
};

struct OracleUse {
    std::uint64_t name_bits = 0;     // u_n consumed from the system name
    std::uint64_t payload_bits = 0;  // ℓ_n of output produced
};

struct CodecTrace {
    std::vector<TraceStep> steps;
    OracleUse oracle_use;
};

// The failure event [τ_k] ∩ t ∩ D_{σ_k * i} = ∅; a first-class result.
struct CodingFailure {
    std::uint64_t step = 0;
    int class_bit = 0;
    Bits sigma;
    Bits tau;
};

struct EncodeResult {
    Bits y;
    CodecTrace trace;
    std::optional<CodingFailure> failure;
    bool ok() const { return !failure.has_value(); }
};

// Partition-system coding: at step k choose the leftmost element of
// [τ_k] ∩ t ∩ D_{σ_k * z(k)} at the next schedule level.
EncodeResult encode(const std::string& z_bits, const PartitionSystem& ps,
                    const FiniteTree& t, const Bits& sigma0, const Bits& tau0);

// Recovers z from y using only the partition system; never reads the tree.
std::string decode(const PartitionSystem& ps, const Bits& y_prefix, const Bits& sigma0,
                   const Bits& tau0);

struct NotBoundaryError : std::runtime_error {
    std::uint64_t level;
    explicit NotBoundaryError(std::uint64_t n)
        : std::runtime_error("y is strictly interior at level " + std::to_string(n)),
          level(n) {}
};

// Classic leftmost/rightmost coding: y↾ℓ_{n+1} is the leftmost (z(n)=0) or
// rightmost (z(n)=1) surviving extension of y↾ℓ_n.
EncodeResult kg_encode(const std::string& z_bits, const FiniteTree& t,
                       const LevelSchedule& s);
std::string kg_decode(const Bits& y_prefix, const FiniteTree& t, const LevelSchedule& s);

std::string trace_to_json(const CodecTrace& trace);

}  // namespace kglab

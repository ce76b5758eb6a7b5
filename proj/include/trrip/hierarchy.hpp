#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trrip/core.hpp"
#include "trrip/policy.hpp"
#include "trrip/temperature.hpp"

namespace trrip {

struct LevelConfig {
    bool enabled = true;
    CacheGeometry geometry;
    PolicyKind policy = PolicyKind::Lru;
    PolicyParams policy_params;
    uint32_t prefetch_degree = 0;  // next-line prefetch on demand miss
};

// L1-I/L1-D -> unified L2 (inclusive) -> unified SLC (exclusive victim cache).
// L2 is always present; the other levels can be disabled for single-level runs.
struct HierarchyConfig {
    LevelConfig l1i;
    LevelConfig l1d;
    LevelConfig l2;
    LevelConfig slc;
    uint64_t seed = 1;

    // Table-1 shaped defaults: 64kB/4-way LRU L1s, 512kB/8-way L2 (policy
    // under test), 1MB/16-way LRU exclusive SLC.
    static HierarchyConfig defaults(PolicyKind l2_policy = PolicyKind::Srrip);
    // Just an L2, for policy studies and oracle comparisons.
    static HierarchyConfig single_level(const CacheGeometry& geom, PolicyKind policy,
                                        const PolicyParams& params = {}, uint64_t seed = 1);
    void validate() const;
};

enum class ServiceLevel : uint8_t { L2 = 0, Slc = 1, Memory = 2 };

struct MissRecord {
    uint64_t line = 0;
    LineClass cls = LineClass::Instruction;
    Temperature temp = Temperature::None;
    ServiceLevel service = ServiceLevel::Memory;
};

struct L2StreamRecord {
    uint64_t line = 0;
    LineClass cls = LineClass::Instruction;
    Temperature temp = Temperature::None;
};

struct LevelStats {
    ClassCounters instr;
    ClassCounters data;
    std::array<uint64_t, 4> evictions_by_temp{};  // indexed by Temperature code
    uint64_t invalidations = 0;                   // back-invalidations received
    uint64_t prefetch_fills = 0;

    const ClassCounters& counters(LineClass cls) const {
        return cls == LineClass::Instruction ? instr : data;
    }
};

struct SimResult {
    LevelStats l1i, l1d, l2, slc;
    std::array<uint64_t, 3> service_histogram{};  // indexed by ServiceLevel
    uint64_t retired_instructions = 0;
    uint64_t total_accesses = 0;
    std::vector<MissRecord> miss_log;        // L2 demand misses, when enabled
    std::vector<L2StreamRecord> l2_stream;   // L2 demand accesses, when enabled

    double instr_mpki() const { return mpki(l2.instr.misses, retired_instructions); }
    double data_mpki() const { return mpki(l2.data.misses, retired_instructions); }
    std::string to_json() const;
    std::string to_csv() const;
};

struct SimOptions {
    bool log_misses = false;
    bool log_l2_stream = false;
};

class Hierarchy {
public:
    Hierarchy(const HierarchyConfig& config, const TemperatureMap& map,
              SimOptions options = {});
    ~Hierarchy();
    Hierarchy(const Hierarchy&) = delete;
    Hierarchy& operator=(const Hierarchy&) = delete;

    struct Outcome {
        bool l1_hit = false;
        bool l2_hit = false;
        ServiceLevel service = ServiceLevel::L2;
    };
    Outcome access(const MemoryAccess& a);

    const SimResult& result() const;
    const ReplacementPolicy& l2_policy() const;

    // Structural invariants: inclusion (L1 lines live in L2), exclusivity
    // (no line in both L2 and SLC), policy internal state. Throws on failure.
    void full_audit() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SimResult simulate(std::span<const MemoryAccess> trace, const TemperatureMap& map,
                   const HierarchyConfig& config, SimOptions options = {});

}  // namespace trrip

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "trrip/core.hpp"

namespace trrip {

enum class PolicyKind : uint8_t {
    Lru,
    Srrip,
    Brrip,
    Drrip,
    Clip,
    Ship,
    Emissary,
    Trrip1,
    Trrip2,
};

const char* to_string(PolicyKind kind);
PolicyKind policy_from_name(const std::string& name);
std::vector<std::string> policy_names();

enum class ClipVariant : uint8_t { A, B, Duel };

struct PolicyParams {
    uint32_t rrpv_bits = 2;
    uint32_t leader_sets = 32;       // per dueling policy, when set count allows
    uint32_t psel_bits = 10;
    uint32_t brrip_throttle = 32;    // 1-in-N fills insert at Intermediate
    uint64_t shct_entries = 1u << 18;  // 2-bit counters, 64kB total
    uint32_t emissary_priority_ways = 4;
    double emissary_costly_prob = 1.0;
    ClipVariant clip_variant = ClipVariant::Duel;
};

// What the request carries into the policy. Temperature arrives with the
// request; it is never stored in set metadata.
struct AccessInfo {
    LineClass cls = LineClass::Instruction;
    Temperature temp = Temperature::None;
    uint64_t pc_line = 0;  // PC line address, the SHiP signature source
    bool demand = true;    // false for prefetch fills
    bool costly = false;   // Emissary starvation proxy: demand instruction miss
};

class ReplacementPolicy {
public:
    virtual ~ReplacementPolicy() = default;

    virtual void on_hit(uint32_t set, uint32_t way, const AccessInfo& info) = 0;
    // Called only when every way in the set is valid. RRIP-family policies
    // mutate RRPVs while searching.
    virtual uint32_t choose_victim(uint32_t set) = 0;
    virtual void on_fill(uint32_t set, uint32_t way, const AccessInfo& info) = 0;
    // Replacement of a valid line (victim chosen above).
    virtual void on_evict(uint32_t /*set*/, uint32_t /*way*/) {}
    // Back-invalidation or exclusive-move removal.
    virtual void on_invalidate(uint32_t /*set*/, uint32_t /*way*/) {}
    // Demand miss observed in this set (set-dueling trains on these).
    virtual void on_demand_miss(uint32_t /*set*/) {}

    virtual PolicyKind kind() const = 0;
    // Internal-consistency check for one set; throws on violation.
    virtual void audit_set(uint32_t /*set*/) const {}

    // Debug probes used by tests; policies without the field return 0.
    virtual uint32_t rrpv(uint32_t /*set*/, uint32_t /*way*/) const { return 0; }
    virtual uint32_t recency_rank(uint32_t /*set*/, uint32_t /*way*/) const { return 0; }
    virtual bool priority_bit(uint32_t /*set*/, uint32_t /*way*/) const { return false; }
    virtual uint32_t psel() const { return 0; }
};

std::unique_ptr<ReplacementPolicy> make_policy(PolicyKind kind, uint32_t sets,
                                               uint32_t ways, const PolicyParams& params,
                                               uint64_t seed);

// Set-dueling leader placement: with P leader pairs, set s leads policy A
// when s % (sets/P) == 0 and policy B when s % (sets/P) == 1. P shrinks to
// sets/2 for tiny caches.
enum class DuelRole : uint8_t { LeaderA, LeaderB, Follower };
DuelRole duel_role(uint32_t set, uint32_t set_count, uint32_t leader_pairs);

uint64_t ship_signature(uint64_t pc_line, uint64_t table_entries);

// Belady's optimal victim: the resident line whose next use lies farthest in
// the future; never-reused lines first; lowest way on ties. `future` is the
// upcoming access sequence for this set.
uint32_t belady_victim(const std::vector<uint64_t>& resident_lines,
                       const std::vector<uint64_t>& future);

}  // namespace trrip

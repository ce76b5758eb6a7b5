#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trrip/core.hpp"
#include "trrip/temperature.hpp"

namespace trrip {

enum class TraceFormat { Text, Binary };

// Binary layout: "TRRP" magic, u8 version (=1), u64 LE record count, then
// 17-byte records (u8 kind, u64 LE vaddr, u64 LE pc).
inline constexpr char kTraceMagic[4] = {'T', 'R', 'R', 'P'};
inline constexpr uint8_t kTraceVersion = 1;
inline constexpr size_t kTraceHeaderBytes = 13;
inline constexpr size_t kTraceRecordBytes = 17;

void write_trace(std::ostream& out, std::span<const MemoryAccess> trace, TraceFormat fmt);
std::vector<MemoryAccess> read_trace(std::istream& in, TraceFormat fmt);

void write_trace_file(const std::string& path, std::span<const MemoryAccess> trace,
                      TraceFormat fmt);
// Format is sniffed from the magic bytes.
std::vector<MemoryAccess> read_trace_file(const std::string& path);

enum class Pattern { HotLoop, Scan, Thrash, MixedTemperature };

const char* to_string(Pattern p);
Pattern pattern_from_name(const std::string& name);

struct PatternSpec {
    Pattern pattern = Pattern::MixedTemperature;
    uint64_t hot_lines = 8;     // resident/loop lines per set group
    uint64_t warm_lines = 0;    // warm interferer pool per set group
    uint64_t cold_lines = 0;    // cold pool per set group (scan length for Scan,
                                // working set for Thrash)
    uint64_t data_lines = 0;    // data interferer pool per set group
    uint64_t iterations = 100;
    uint64_t target_reuse_distance = 11;  // MixedTemperature only
    // Rotate the hot sweep start by this much each cycle. Zero keeps the
    // sweep order fixed, which makes every measured hot reuse distance equal
    // target_reuse_distance exactly; nonzero breaks the phase alignment
    // between victim choice and the next sweep (distances then spread around
    // the target).
    uint64_t hot_rotate = 0;
    uint64_t sets_covered = 1;   // distinct set groups to populate
    uint64_t set_modulus = 2048; // lines within a group are congruent mod this
    uint64_t line_size = 64;
    uint64_t page_size = 4096;
    uint64_t seed = 1;  // recorded for reproducibility; current patterns are
                        // fully deterministic and do not consume it

    std::string to_json() const;
    static PatternSpec from_json(const std::string& text);
    void validate() const;
};

// A generated block with a real address range, so temperature maps can be
// re-derived at any percentile or page size without re-laying-out code.
struct AddressedBlock {
    std::string id;
    uint64_t start_vaddr = 0;
    uint64_t size_bytes = 0;
    uint64_t count = 0;
};

struct Workload {
    std::vector<MemoryAccess> trace;
    TemperatureMap map;
    std::vector<AddressedBlock> blocks;
};

Workload generate(const PatternSpec& spec);

std::vector<ProfiledBlock> to_profile(const std::vector<AddressedBlock>& blocks);

std::string blocks_to_json(const std::vector<AddressedBlock>& blocks);
std::vector<AddressedBlock> blocks_from_json(const std::string& text);

// Classify the blocks at the given thresholds and mark each block's pages.
// Pages touched by two temperatures become None (unmark semantics; generated
// workloads place classes on disjoint address ranges so this does not occur).
TemperatureMap derive_block_map(const std::vector<AddressedBlock>& blocks,
                                const ThresholdParams& params, uint64_t page_size);

}  // namespace trrip

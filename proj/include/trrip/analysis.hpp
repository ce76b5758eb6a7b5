#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trrip/core.hpp"
#include "trrip/hierarchy.hpp"
#include "trrip/temperature.hpp"

namespace trrip {

enum class ReuseMode { Base, HotOnly };

struct ReuseHistogram {
    ReuseMode mode = ReuseMode::Base;
    // Bin k covers (edges[k-1], edges[k]]; bin 0 starts at 0; one overflow
    // bin past the last edge. Defaults follow the 0-4 / 5-8 / 9-12 / 13-16 /
    // >16 breakdown.
    std::vector<uint64_t> bin_edges{4, 8, 12, 16};
    std::vector<uint64_t> bin_counts;  // bin_edges.size() + 1 entries
    uint64_t total_hot_accesses = 0;   // all accesses to hot instruction lines
    uint64_t measured_reaccesses = 0;  // sum of bin_counts

    size_t bin_for(uint64_t distance) const;
    std::string bin_label(size_t k) const;
    std::string to_csv() const;
    std::string to_json() const;
};

// Per-set reuse distance of hot instruction lines: unique lines touched in
// the set between consecutive accesses to the same line. Base mode counts
// every line, HotOnly only hot instruction lines.
struct ReuseInput {
    uint64_t line = 0;
    bool is_instr = true;
    bool is_hot = false;
};

ReuseHistogram reuse_distances(std::span<const ReuseInput> stream, uint64_t set_count,
                               ReuseMode mode,
                               std::span<const uint64_t> bin_edges = {});

// Raw-trace convenience wrapper: set mapping from the geometry, hotness from
// the map.
ReuseHistogram reuse_distances(std::span<const MemoryAccess> trace,
                               const TemperatureMap& map, const CacheGeometry& geometry,
                               ReuseMode mode,
                               std::span<const uint64_t> bin_edges = {});

// Exact per-reaccess distances for hot lines, for tests and calibration.
std::vector<uint64_t> reuse_distance_samples(std::span<const ReuseInput> stream,
                                             uint64_t set_count, ReuseMode mode);

enum class CoverageFilter { All, ExcludeExternal };

struct CoverageCurve {
    std::vector<uint32_t> percentiles{1, 5, 10, 25, 50, 100};
    std::vector<double> coverage;  // fraction of top-N% costliest instruction
                                   // misses that land on Hot pages
    CoverageFilter filter = CoverageFilter::All;
    std::string to_csv() const;
    std::string to_json() const;
};

// Cost substitutes for decode starvation: service level first (memory above
// SLC), then per-line miss count, then line number for determinism.
CoverageCurve costly_coverage(std::span<const MissRecord> miss_log,
                              CoverageFilter filter,
                              std::span<const uint32_t> percentiles = {});

struct MpkiReduction {
    double instr_percent = 0.0;
    double data_percent = 0.0;
    bool instr_defined = true;  // false when the baseline MPKI is zero
    bool data_defined = true;
};

MpkiReduction mpki_reduction(const SimResult& baseline, const SimResult& candidate);

// Geomean over (1 + r/100) multipliers, converted back to a percentage;
// admits negative entries.
double geomean_reduction(std::span<const double> reductions_percent);

}  // namespace trrip

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trrip/analysis.hpp"
#include "trrip/hierarchy.hpp"
#include "trrip/trace.hpp"

namespace trrip {

std::string hierarchy_to_json(const HierarchyConfig& config);
HierarchyConfig hierarchy_from_json(const std::string& text);

struct WorkloadRef {
    std::string trace_path;               // exclusive with generator
    std::optional<PatternSpec> generator;
    std::string map_path;     // optional; generator supplies its own map
    std::string blocks_path;  // optional; enables classification sweeps
    std::string name;         // label in reports; defaults to path/pattern
};

struct ExperimentConfig {
    uint64_t seed = 1;
    std::string out_dir = "out";
    HierarchyConfig hierarchy = HierarchyConfig::defaults(PolicyKind::Trrip1);
    ThresholdParams thresholds;
    std::vector<WorkloadRef> workloads;               // >= 1
    PolicyKind baseline = PolicyKind::Srrip;
    std::vector<PolicyKind> compare_policies;         // cmd_compare
    std::string sweep_axis;                           // cmd_sweep
    std::vector<double> sweep_values;

    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    void validate() const;
};

struct LoadedWorkload {
    std::string name;
    std::vector<MemoryAccess> trace;
    TemperatureMap map;
    std::vector<AddressedBlock> blocks;  // empty when unavailable
};

LoadedWorkload load_workload(const WorkloadRef& ref);

// Effective output directory: TRRIP_OUT overrides the config value.
std::string resolve_out_dir(const ExperimentConfig& config);

struct CompareCell {
    double instr = 0.0;
    double data = 0.0;
    bool defined = true;
};

struct CompareReport {
    std::vector<std::string> workload_names;
    PolicyKind baseline;
    std::vector<double> baseline_instr_mpki;  // per workload
    std::vector<double> baseline_data_mpki;
    std::vector<PolicyKind> policies;              // excludes baseline
    std::vector<std::vector<CompareCell>> cells;   // [policy][workload] reductions
    std::vector<CompareCell> geomean;              // per policy, over workloads

    std::string to_csv() const;
    std::string to_json() const;
    std::string to_text() const;
};

struct SweepRow {
    double value = 0.0;
    double candidate_instr_mpki = 0.0;
    double candidate_data_mpki = 0.0;
    double baseline_instr_mpki = 0.0;
    double baseline_data_mpki = 0.0;
    // Normalized-speedup proxy: instruction-MPKI reduction vs the baseline
    // policy on the same configuration.
    double instr_reduction_percent = 0.0;
    double data_reduction_percent = 0.0;
};

struct SweepTable {
    std::string axis;
    PolicyKind candidate;
    PolicyKind baseline;
    std::vector<SweepRow> rows;

    std::string to_csv() const;
    std::string to_json() const;
};

SimResult run_single(const ExperimentConfig& config, const LoadedWorkload& workload,
                     SimOptions options = {});
CompareReport run_compare(const ExperimentConfig& config);
SweepTable run_sweep(const ExperimentConfig& config);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace trrip

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "trrip/experiment.hpp"

using namespace trrip;

namespace {

ExperimentConfig mixed_config(PolicyKind policy, uint64_t iterations = 60) {
    ExperimentConfig cfg;
    cfg.hierarchy = HierarchyConfig::defaults(policy);
    WorkloadRef ref;
    PatternSpec spec;
    spec.pattern = Pattern::MixedTemperature;
    spec.hot_lines = 8;
    spec.cold_lines = 64;
    spec.data_lines = 64;
    spec.target_reuse_distance = 11;
    spec.hot_rotate = 1;
    spec.iterations = iterations;
    ref.generator = spec;
    cfg.workloads.push_back(ref);
    return cfg;
}

}  // namespace

TEST_CASE("experiment config round-trips byte-exactly") {
    ExperimentConfig cfg = mixed_config(PolicyKind::Trrip1);
    cfg.seed = 1234;
    cfg.compare_policies = {PolicyKind::Srrip, PolicyKind::Trrip1, PolicyKind::Clip};
    cfg.sweep_axis = "l2_associativity";
    cfg.sweep_values = {4, 8, 16};
    cfg.hierarchy.l2.policy_params.clip_variant = ClipVariant::A;
    cfg.thresholds.percentile_hot = 0.95;

    std::string json = cfg.to_json();
    ExperimentConfig back = ExperimentConfig::from_json(json);
    CHECK(back.to_json() == json);
}

TEST_CASE("hierarchy config json round-trip keeps parameters") {
    HierarchyConfig hc = HierarchyConfig::defaults(PolicyKind::Emissary);
    hc.l2.policy_params.emissary_priority_ways = 3;
    hc.l2.prefetch_degree = 2;
    hc.slc.enabled = false;
    std::string json = hierarchy_to_json(hc);
    HierarchyConfig back = hierarchy_from_json(json);
    CHECK(hierarchy_to_json(back) == json);
    CHECK(back.l2.policy_params.emissary_priority_ways == 3);
    CHECK_FALSE(back.slc.enabled);
}

TEST_CASE("config validation catches broken workloads") {
    ExperimentConfig none;
    CHECK_THROWS_AS(none.validate(), ConfigError);

    ExperimentConfig both = mixed_config(PolicyKind::Srrip);
    both.workloads[0].trace_path = "also_a_path.bin";
    CHECK_THROWS_AS(both.validate(), ConfigError);
}

TEST_CASE("run_single is reproducible from its config") {
    ExperimentConfig cfg = mixed_config(PolicyKind::Brrip);
    cfg.seed = 7;
    LoadedWorkload w = load_workload(cfg.workloads[0]);
    SimResult a = run_single(cfg, w);
    SimResult b = run_single(cfg, w);
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("compare reports reductions against the baseline") {
    ExperimentConfig cfg = mixed_config(PolicyKind::Trrip1);
    cfg.baseline = PolicyKind::Srrip;
    cfg.compare_policies = {PolicyKind::Srrip, PolicyKind::Trrip1, PolicyKind::Lru};
    CompareReport report = run_compare(cfg);

    REQUIRE(report.policies.size() == 2);  // baseline excluded
    REQUIRE(report.cells.size() == 2);
    CHECK(report.workload_names.size() == 1);

    // Cross-check one cell against a direct pair of runs.
    LoadedWorkload w = load_workload(cfg.workloads[0]);
    ExperimentConfig base_cfg = cfg;
    base_cfg.hierarchy.l2.policy = PolicyKind::Srrip;
    ExperimentConfig cand_cfg = cfg;
    cand_cfg.hierarchy.l2.policy = report.policies[0];
    MpkiReduction direct =
        mpki_reduction(run_single(base_cfg, w), run_single(cand_cfg, w));
    CHECK(report.cells[0][0].instr == doctest::Approx(direct.instr_percent));
    CHECK(report.cells[0][0].data == doctest::Approx(direct.data_percent));

    std::string csv = report.to_csv();
    CHECK(csv.find("policy,class") == 0);
    CHECK(report.to_json().find("baseline") != std::string::npos);
    CHECK(report.to_text().find("MPKI reduction") != std::string::npos);
}

TEST_CASE("compare with the baseline alone reports raw MPKI only") {
    ExperimentConfig cfg = mixed_config(PolicyKind::Srrip, 20);
    cfg.baseline = PolicyKind::Srrip;
    cfg.compare_policies = {PolicyKind::Srrip};
    CompareReport report = run_compare(cfg);
    CHECK(report.policies.empty());
    CHECK(report.baseline_instr_mpki.size() == 1);
    std::string csv = report.to_csv();
    CHECK(csv.find("srrip_raw_mpki") != std::string::npos);
}

TEST_CASE("compare with several workloads adds a geomean column") {
    ExperimentConfig cfg = mixed_config(PolicyKind::Trrip1, 40);
    WorkloadRef second;
    PatternSpec scan;
    scan.pattern = Pattern::Scan;
    scan.hot_lines = 2;
    scan.cold_lines = 300;
    scan.iterations = 100;
    second.generator = scan;
    second.name = "scan_a";
    cfg.workloads.push_back(second);
    cfg.compare_policies = {PolicyKind::Trrip1};
    CompareReport report = run_compare(cfg);
    REQUIRE(report.workload_names.size() == 2);
    std::vector<double> reds = {report.cells[0][0].instr, report.cells[0][1].instr};
    CHECK(report.geomean[0].instr == doctest::Approx(geomean_reduction(reds)));
    CHECK(report.to_csv().find("geomean") != std::string::npos);
}

TEST_CASE("associativity sweep produces one row per value") {
    ExperimentConfig cfg = mixed_config(PolicyKind::Trrip1, 80);
    cfg.sweep_axis = "l2_associativity";
    cfg.sweep_values = {4, 8, 16};
    SweepTable table = run_sweep(cfg);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].value == 4);
    CHECK(table.rows[2].value == 16);
    // Hot lines are captured strictly better with more ways on this trace.
    CHECK(table.rows[0].candidate_instr_mpki >= table.rows[1].candidate_instr_mpki);
    CHECK(table.rows[1].candidate_instr_mpki >= table.rows[2].candidate_instr_mpki);
    CHECK(table.to_csv().find("axis,value") == 0);
}

TEST_CASE("capacity sweep is flat when the working set always fits") {
    ExperimentConfig cfg;
    cfg.hierarchy = HierarchyConfig::defaults(PolicyKind::Trrip1);
    WorkloadRef ref;
    PatternSpec loop;
    loop.pattern = Pattern::HotLoop;
    loop.hot_lines = 16;
    loop.data_lines = 4;
    loop.iterations = 200;
    ref.generator = loop;
    cfg.workloads.push_back(ref);
    cfg.sweep_axis = "l2_capacity";
    cfg.sweep_values = {128 * 1024, 256 * 1024, 512 * 1024};
    SweepTable table = run_sweep(cfg);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].candidate_instr_mpki ==
          doctest::Approx(table.rows[1].candidate_instr_mpki));
    CHECK(table.rows[1].candidate_instr_mpki ==
          doctest::Approx(table.rows[2].candidate_instr_mpki));
}

TEST_CASE("percentile sweep re-derives the map and keeps hot pages monotone") {
    ExperimentConfig cfg = mixed_config(PolicyKind::Trrip1, 30);
    cfg.workloads[0].generator->warm_lines = 8;
    cfg.workloads[0].generator->target_reuse_distance = 12;
    LoadedWorkload w = load_workload(cfg.workloads[0]);
    REQUIRE_FALSE(w.blocks.empty());

    size_t prev_hot = 0;
    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0}) {
        ThresholdParams t;
        t.percentile_hot = p;
        t.percentile_cold = 1.0;
        TemperatureMap m = derive_block_map(w.blocks, t, 4096);
        size_t hot = 0;
        for (const auto& [page, temp] : m.pages) hot += temp == Temperature::Hot;
        CHECK(hot >= prev_hot);
        prev_hot = hot;
    }

    cfg.sweep_axis = "percentile_hot";
    cfg.sweep_values = {0.5, 0.99, 1.0};
    SweepTable table = run_sweep(cfg);
    CHECK(table.rows.size() == 3);
}

TEST_CASE("sweep without a block table rejects classification axes") {
    ExperimentConfig cfg = mixed_config(PolicyKind::Trrip1, 10);
    LoadedWorkload w = load_workload(cfg.workloads[0]);
    std::string dir = "exp_test_tmp";
    std::filesystem::create_directories(dir);
    write_trace_file(dir + "/t.bin", w.trace, TraceFormat::Binary);
    write_map_file(dir + "/m.json", w.map);

    ExperimentConfig file_cfg = cfg;
    file_cfg.workloads.clear();
    WorkloadRef ref;
    ref.trace_path = dir + "/t.bin";
    ref.map_path = dir + "/m.json";
    file_cfg.workloads.push_back(ref);
    file_cfg.sweep_axis = "percentile_hot";
    file_cfg.sweep_values = {0.5, 1.0};
    CHECK_THROWS_AS(run_sweep(file_cfg), ConfigError);

    // With the generator's block table saved alongside, the sweep works.
    write_text_file(dir + "/blocks.json", blocks_to_json(w.blocks));
    file_cfg.workloads[0].blocks_path = dir + "/blocks.json";
    SweepTable table = run_sweep(file_cfg);
    CHECK(table.rows.size() == 2);
}

TEST_CASE("TRRIP_OUT overrides the configured output directory") {
    ExperimentConfig cfg = mixed_config(PolicyKind::Srrip, 5);
    cfg.out_dir = "from_config";
    CHECK(resolve_out_dir(cfg) == "from_config");
    setenv("TRRIP_OUT", "from_env", 1);
    CHECK(resolve_out_dir(cfg) == "from_env");
    unsetenv("TRRIP_OUT");
}

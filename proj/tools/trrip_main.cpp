#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "trrip/analysis.hpp"
#include "trrip/experiment.hpp"
#include "trrip/hierarchy.hpp"
#include "trrip/temperature.hpp"
#include "trrip/trace.hpp"

namespace fs = std::filesystem;
using namespace trrip;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

std::string out_path(const std::string& dir, const std::string& file) {
    fs::create_directories(dir);
    return (fs::path(dir) / file).string();
}

std::string resolve_dir(const std::string& flag_dir) {
    if (const char* env = std::getenv("TRRIP_OUT"); env && *env) return env;
    return flag_dir;
}

ExperimentConfig load_config(const std::string& path) {
    return ExperimentConfig::from_json(read_text_file(path));
}

int cmd_classify(const std::string& profile_path, double percentile_hot,
                 double percentile_cold, uint64_t page_size, const std::string& overlap,
                 uint64_t base_vaddr, uint64_t alignment, const std::string& dir) {
    auto blocks = read_profile_file(profile_path);
    ThresholdParams params{percentile_hot, percentile_cold};
    auto temps = classify(blocks, params);
    SectionLayout layout = layout_sections(blocks, temps, base_vaddr, alignment);
    OverlapMode mode = overlap == "pad" ? OverlapMode::Pad : OverlapMode::Unmark;
    if (overlap != "pad" && overlap != "unmark")
        throw ConfigError("--overlap must be pad or unmark");
    PageMapResult pm = build_page_map(layout, page_size, mode);

    write_map_file(out_path(dir, "map.json"), pm.map, false);
    write_map_file(out_path(dir, "map.bin"), pm.map, true);

    PageUtilization util = page_utilization(pm.layout, page_size);
    std::ostringstream rep;
    rep << "profile: " << profile_path << "\n";
    rep << "percentile_hot: " << percentile_hot
        << "  percentile_cold: " << percentile_cold << "\n";
    rep << "page_size: " << page_size << "  overlap: " << overlap << "\n\n";
    rep << "section  start        size      blocks\n";
    for (const auto& sec : pm.layout.sections) {
        char buf[96];
        snprintf(buf, sizeof buf, "%-8s 0x%-10llx %-9llu %zu\n", to_string(sec.temperature),
                 (unsigned long long)sec.start_vaddr, (unsigned long long)sec.size_bytes,
                 sec.block_ids.size());
        rep << buf;
    }
    rep << "\npages used (hot/warm): " << util.hot_pages << "/" << util.warm_pages << "\n";
    rep << "mapped pages: " << pm.map.pages.size() << "\n";
    write_text_file(out_path(dir, "layout.txt"), rep.str());
    std::cout << rep.str();
    std::cout << "wrote " << out_path(dir, "map.json") << "\n";
    return kExitOk;
}

int cmd_gen_trace(const std::string& spec_path, const std::string& spec_inline,
                  const std::string& format, const std::string& dir) {
    PatternSpec spec;
    if (!spec_path.empty())
        spec = PatternSpec::from_json(read_text_file(spec_path));
    else if (!spec_inline.empty())
        spec = PatternSpec::from_json(spec_inline);
    else
        throw ConfigError("gen-trace: provide --spec FILE or --spec-json TEXT");

    Workload w = generate(spec);
    TraceFormat fmt = format == "text" ? TraceFormat::Text : TraceFormat::Binary;
    if (format != "text" && format != "binary")
        throw ConfigError("--format must be text or binary");
    std::string trace_file = format == "text" ? "trace.txt" : "trace.bin";
    write_trace_file(out_path(dir, trace_file), w.trace, fmt);
    write_map_file(out_path(dir, "map.json"), w.map, false);
    write_text_file(out_path(dir, "spec.json"), spec.to_json() + "\n");
    write_text_file(out_path(dir, "blocks.json"), blocks_to_json(w.blocks) + "\n");
    write_profile_file(out_path(dir, "profile.txt"), to_profile(w.blocks));
    std::cout << "generated " << w.trace.size() << " accesses, "
              << w.map.pages.size() << " mapped pages -> " << dir << "\n";
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& dir_flag,
                 bool coverage) {
    ExperimentConfig config = load_config(config_path);
    if (!dir_flag.empty()) config.out_dir = dir_flag;
    std::string dir = resolve_out_dir(config);
    LoadedWorkload w = load_workload(config.workloads.at(0));
    SimOptions options;
    options.log_misses = coverage;
    SimResult r = run_single(config, w, options);
    write_text_file(out_path(dir, "result.json"), r.to_json() + "\n");
    write_text_file(out_path(dir, "result.csv"), r.to_csv());
    write_text_file(out_path(dir, "config.json"), config.to_json() + "\n");
    if (coverage) {
        CoverageCurve all = costly_coverage(r.miss_log, CoverageFilter::All);
        CoverageCurve internal =
            costly_coverage(r.miss_log, CoverageFilter::ExcludeExternal);
        write_text_file(out_path(dir, "coverage_all.csv"), all.to_csv());
        write_text_file(out_path(dir, "coverage_all.json"), all.to_json() + "\n");
        write_text_file(out_path(dir, "coverage_internal.csv"), internal.to_csv());
        write_text_file(out_path(dir, "coverage_internal.json"), internal.to_json() + "\n");
    }
    std::cout << "workload: " << w.name << "\n"
              << "policy:   " << to_string(config.hierarchy.l2.policy) << "\n"
              << "accesses: " << r.total_accesses << "\n"
              << "retired:  " << r.retired_instructions << "\n";
    char buf[96];
    snprintf(buf, sizeof buf, "L2 MPKI:  instr %.2f  data %.2f\n", r.instr_mpki(),
             r.data_mpki());
    std::cout << buf << "results -> " << dir << "\n";
    return kExitOk;
}

int cmd_compare(const std::string& config_path, const std::string& dir_flag) {
    ExperimentConfig config = load_config(config_path);
    if (!dir_flag.empty()) config.out_dir = dir_flag;
    std::string dir = resolve_out_dir(config);
    CompareReport report = run_compare(config);
    write_text_file(out_path(dir, "compare.csv"), report.to_csv());
    write_text_file(out_path(dir, "compare.json"), report.to_json() + "\n");
    write_text_file(out_path(dir, "config.json"), config.to_json() + "\n");
    std::cout << report.to_text() << "results -> " << dir << "\n";
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              std::vector<double> values, const std::string& dir_flag) {
    ExperimentConfig config = load_config(config_path);
    if (!axis.empty()) config.sweep_axis = axis;
    if (!values.empty()) config.sweep_values = values;
    if (!dir_flag.empty()) config.out_dir = dir_flag;
    std::string dir = resolve_out_dir(config);
    SweepTable table = run_sweep(config);
    write_text_file(out_path(dir, "sweep.csv"), table.to_csv());
    write_text_file(out_path(dir, "sweep.json"), table.to_json() + "\n");
    write_text_file(out_path(dir, "config.json"), config.to_json() + "\n");
    std::cout << table.to_csv() << "results -> " << dir << "\n";
    return kExitOk;
}

int cmd_reuse(const std::string& trace_path, const std::string& map_path,
              const std::string& stream, const std::string& mode_name,
              uint64_t capacity, uint32_t assoc, uint32_t line_size,
              const std::string& dir) {
    auto trace = read_trace_file(trace_path);
    TemperatureMap map;
    if (!map_path.empty()) map = read_map_file(map_path);
    CacheGeometry geom{capacity, assoc, line_size};
    ReuseMode mode = mode_name == "hot_only" ? ReuseMode::HotOnly : ReuseMode::Base;
    if (mode_name != "base" && mode_name != "hot_only")
        throw ConfigError("--mode must be base or hot_only");

    ReuseHistogram hist;
    if (stream == "raw") {
        hist = reuse_distances(trace, map, geom, mode);
    } else if (stream == "l2") {
        HierarchyConfig hc = HierarchyConfig::defaults();
        hc.l2.geometry = geom;
        SimOptions opt;
        opt.log_l2_stream = true;
        SimResult r = simulate(trace, map, hc, opt);
        std::vector<ReuseInput> events;
        events.reserve(r.l2_stream.size());
        for (const auto& e : r.l2_stream)
            events.push_back({e.line, e.cls == LineClass::Instruction,
                              e.temp == Temperature::Hot});
        hist = reuse_distances(events, geom.set_count(), mode);
    } else {
        throw ConfigError("--stream must be raw or l2");
    }
    write_text_file(out_path(dir, "reuse.csv"), hist.to_csv());
    write_text_file(out_path(dir, "reuse.json"), hist.to_json() + "\n");
    std::cout << hist.to_csv() << "results -> " << dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trace-driven cache hierarchy simulator with temperature-guided "
                 "replacement policies"};
    app.require_subcommand(1);

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "classify a profile and emit a page temperature map");
    std::string profile_path, overlap = "pad", dir_classify = "out";
    double p_hot = 0.99, p_cold = 0.9999;
    uint64_t page_size = 4096, base_vaddr = 0x10000000, alignment = 64;
    classify_cmd->add_option("--profile", profile_path, "profile file (block_id,size,count)")
        ->required();
    classify_cmd->add_option("--percentile-hot", p_hot, "hot percentile (0,1]");
    classify_cmd->add_option("--percentile-cold", p_cold, "cold percentile (0,1]");
    classify_cmd->add_option("--page-size", page_size, "page size in bytes");
    classify_cmd->add_option("--overlap", overlap, "overlap handling: pad|unmark");
    classify_cmd->add_option("--base-vaddr", base_vaddr, "layout base address");
    classify_cmd->add_option("--align", alignment, "section alignment");
    classify_cmd->add_option("--out", dir_classify, "output directory");

    // gen-trace
    auto* gen_cmd = app.add_subcommand("gen-trace", "generate a synthetic trace and map");
    std::string spec_path, spec_inline, gen_format = "binary", dir_gen = "out";
    gen_cmd->add_option("--spec", spec_path, "pattern spec JSON file");
    gen_cmd->add_option("--spec-json", spec_inline, "pattern spec JSON text");
    gen_cmd->add_option("--format", gen_format, "trace format: binary|text");
    gen_cmd->add_option("--out", dir_gen, "output directory");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "run one simulation from a config");
    std::string sim_config, dir_sim;
    bool sim_coverage = false;
    sim_cmd->add_option("--config", sim_config, "experiment config JSON")->required();
    sim_cmd->add_option("--out", dir_sim, "output directory override");
    sim_cmd->add_flag("--coverage", sim_coverage,
                      "log per-miss records and emit costly-miss coverage curves");

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "run several policies on one workload");
    std::string cmp_config, dir_cmp;
    cmp_cmd->add_option("--config", cmp_config, "experiment config JSON")->required();
    cmp_cmd->add_option("--out", dir_cmp, "output directory override");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "sweep one axis and report MPKI");
    std::string sweep_config, sweep_axis, dir_sweep;
    std::vector<double> sweep_values;
    sweep_cmd->add_option("--config", sweep_config, "experiment config JSON")->required();
    sweep_cmd->add_option("--axis", sweep_axis,
                          "percentile_hot|page_size|l2_capacity|l2_associativity");
    sweep_cmd->add_option("--values", sweep_values, "axis values");
    sweep_cmd->add_option("--out", dir_sweep, "output directory override");

    // reuse
    auto* reuse_cmd = app.add_subcommand("reuse", "reuse-distance histogram of hot lines");
    std::string reuse_trace, reuse_map, reuse_stream = "raw", reuse_mode = "base",
                dir_reuse = "out";
    uint64_t reuse_capacity = 512 * 1024;
    uint32_t reuse_assoc = 8, reuse_line = 64;
    reuse_cmd->add_option("--trace", reuse_trace, "trace file")->required();
    reuse_cmd->add_option("--map", reuse_map, "temperature map file");
    reuse_cmd->add_option("--stream", reuse_stream, "measure on: raw|l2");
    reuse_cmd->add_option("--mode", reuse_mode, "counting mode: base|hot_only");
    reuse_cmd->add_option("--capacity", reuse_capacity, "cache capacity for set mapping");
    reuse_cmd->add_option("--assoc", reuse_assoc, "associativity for set mapping");
    reuse_cmd->add_option("--line-size", reuse_line, "line size");
    reuse_cmd->add_option("--out", dir_reuse, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (classify_cmd->parsed())
            return cmd_classify(profile_path, p_hot, p_cold, page_size, overlap,
                                base_vaddr, alignment, resolve_dir(dir_classify));
        if (gen_cmd->parsed())
            return cmd_gen_trace(spec_path, spec_inline, gen_format, resolve_dir(dir_gen));
        if (sim_cmd->parsed()) return cmd_simulate(sim_config, dir_sim, sim_coverage);
        if (cmp_cmd->parsed()) return cmd_compare(cmp_config, dir_cmp);
        if (sweep_cmd->parsed())
            return cmd_sweep(sweep_config, sweep_axis, sweep_values, dir_sweep);
        if (reuse_cmd->parsed())
            return cmd_reuse(reuse_trace, reuse_map, reuse_stream, reuse_mode,
                             reuse_capacity, reuse_assoc, reuse_line,
                             resolve_dir(dir_reuse));
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitConfig;
}

#include "trrip/experiment.hpp"

#include <cstdlib>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

namespace trrip {

namespace {

nlohmann::json level_json(const LevelConfig& lc) {
    nlohmann::json j;
    j["enabled"] = lc.enabled;
    j["capacity"] = lc.geometry.capacity_bytes;
    j["associativity"] = lc.geometry.associativity;
    j["line_size"] = lc.geometry.line_size_bytes;
    j["policy"] = std::string(to_string(lc.policy));
    j["prefetch_degree"] = lc.prefetch_degree;
    const PolicyParams d;
    const PolicyParams& p = lc.policy_params;
    if (p.rrpv_bits != d.rrpv_bits) j["rrpv_bits"] = p.rrpv_bits;
    if (p.leader_sets != d.leader_sets) j["leader_sets"] = p.leader_sets;
    if (p.brrip_throttle != d.brrip_throttle) j["brrip_throttle"] = p.brrip_throttle;
    if (p.emissary_priority_ways != d.emissary_priority_ways)
        j["emissary_priority_ways"] = p.emissary_priority_ways;
    if (p.emissary_costly_prob != d.emissary_costly_prob)
        j["emissary_costly_prob"] = p.emissary_costly_prob;
    if (p.clip_variant != d.clip_variant)
        j["clip_variant"] = p.clip_variant == ClipVariant::A   ? "a"
                            : p.clip_variant == ClipVariant::B ? "b"
                                                               : "duel";
    return j;
}

LevelConfig level_from_json(const nlohmann::json& j, const LevelConfig& defaults) {
    LevelConfig lc = defaults;
    if (j.contains("enabled")) lc.enabled = j["enabled"].get<bool>();
    if (j.contains("capacity")) lc.geometry.capacity_bytes = j["capacity"].get<uint64_t>();
    if (j.contains("associativity"))
        lc.geometry.associativity = j["associativity"].get<uint32_t>();
    if (j.contains("line_size"))
        lc.geometry.line_size_bytes = j["line_size"].get<uint32_t>();
    if (j.contains("policy")) lc.policy = policy_from_name(j["policy"].get<std::string>());
    if (j.contains("prefetch_degree"))
        lc.prefetch_degree = j["prefetch_degree"].get<uint32_t>();
    if (j.contains("rrpv_bits")) lc.policy_params.rrpv_bits = j["rrpv_bits"].get<uint32_t>();
    if (j.contains("leader_sets"))
        lc.policy_params.leader_sets = j["leader_sets"].get<uint32_t>();
    if (j.contains("brrip_throttle"))
        lc.policy_params.brrip_throttle = j["brrip_throttle"].get<uint32_t>();
    if (j.contains("emissary_priority_ways"))
        lc.policy_params.emissary_priority_ways = j["emissary_priority_ways"].get<uint32_t>();
    if (j.contains("emissary_costly_prob"))
        lc.policy_params.emissary_costly_prob = j["emissary_costly_prob"].get<double>();
    if (j.contains("clip_variant")) {
        std::string v = j["clip_variant"].get<std::string>();
        if (v == "a")
            lc.policy_params.clip_variant = ClipVariant::A;
        else if (v == "b")
            lc.policy_params.clip_variant = ClipVariant::B;
        else if (v == "duel")
            lc.policy_params.clip_variant = ClipVariant::Duel;
        else
            throw ConfigError("clip_variant must be a, b, or duel");
    }
    return lc;
}

nlohmann::json hierarchy_json_obj(const HierarchyConfig& c) {
    nlohmann::json j;
    j["l1i"] = level_json(c.l1i);
    j["l1d"] = level_json(c.l1d);
    j["l2"] = level_json(c.l2);
    j["slc"] = level_json(c.slc);
    j["seed"] = c.seed;
    return j;
}

HierarchyConfig hierarchy_from_json_obj(const nlohmann::json& j) {
    HierarchyConfig c = HierarchyConfig::defaults();
    if (j.contains("l1i")) c.l1i = level_from_json(j["l1i"], c.l1i);
    if (j.contains("l1d")) c.l1d = level_from_json(j["l1d"], c.l1d);
    if (j.contains("l2")) c.l2 = level_from_json(j["l2"], c.l2);
    if (j.contains("slc")) c.slc = level_from_json(j["slc"], c.slc);
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    return c;
}

}  // namespace

std::string hierarchy_to_json(const HierarchyConfig& config) {
    return hierarchy_json_obj(config).dump(2);
}

HierarchyConfig hierarchy_from_json(const std::string& text) {
    try {
        return hierarchy_from_json_obj(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("hierarchy JSON parse error: ") + e.what());
    }
}

std::string ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    j["hierarchy"] = hierarchy_json_obj(hierarchy);
    j["thresholds"] = {{"percentile_hot", thresholds.percentile_hot},
                       {"percentile_cold", thresholds.percentile_cold}};
    nlohmann::json wl = nlohmann::json::array();
    for (const auto& w : workloads) {
        nlohmann::json e;
        if (w.generator)
            e["generator"] = nlohmann::json::parse(w.generator->to_json());
        if (!w.trace_path.empty()) e["trace"] = w.trace_path;
        if (!w.map_path.empty()) e["map"] = w.map_path;
        if (!w.blocks_path.empty()) e["blocks"] = w.blocks_path;
        if (!w.name.empty()) e["name"] = w.name;
        wl.push_back(e);
    }
    j["workloads"] = wl;
    j["baseline"] = std::string(to_string(baseline));
    if (!compare_policies.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (auto p : compare_policies) arr.push_back(std::string(to_string(p)));
        j["compare_policies"] = arr;
    }
    if (!sweep_axis.empty()) {
        j["sweep"] = {{"axis", sweep_axis}, {"values", sweep_values}};
    }
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("experiment config parse error: ") + e.what());
    }
    ExperimentConfig c;
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("hierarchy")) c.hierarchy = hierarchy_from_json_obj(j["hierarchy"]);
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        if (t.contains("percentile_hot"))
            c.thresholds.percentile_hot = t["percentile_hot"].get<double>();
        if (t.contains("percentile_cold"))
            c.thresholds.percentile_cold = t["percentile_cold"].get<double>();
    }
    if (j.contains("workloads")) {
        for (const auto& e : j["workloads"]) {
            WorkloadRef w;
            if (e.contains("generator"))
                w.generator = PatternSpec::from_json(e["generator"].dump());
            if (e.contains("trace")) w.trace_path = e["trace"].get<std::string>();
            if (e.contains("map")) w.map_path = e["map"].get<std::string>();
            if (e.contains("blocks")) w.blocks_path = e["blocks"].get<std::string>();
            if (e.contains("name")) w.name = e["name"].get<std::string>();
            c.workloads.push_back(std::move(w));
        }
    }
    if (j.contains("baseline")) c.baseline = policy_from_name(j["baseline"].get<std::string>());
    if (j.contains("compare_policies"))
        for (const auto& p : j["compare_policies"])
            c.compare_policies.push_back(policy_from_name(p.get<std::string>()));
    if (j.contains("sweep")) {
        c.sweep_axis = j["sweep"]["axis"].get<std::string>();
        for (const auto& v : j["sweep"]["values"]) c.sweep_values.push_back(v.get<double>());
    }
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    hierarchy.validate();
    thresholds.validate();
    if (workloads.empty()) throw ConfigError("experiment: at least one workload required");
    for (const auto& w : workloads) {
        if (w.generator && !w.trace_path.empty())
            throw ConfigError("workload: generator and trace path are exclusive");
        if (!w.generator && w.trace_path.empty())
            throw ConfigError("workload: needs a generator spec or a trace path");
    }
}

LoadedWorkload load_workload(const WorkloadRef& ref) {
    LoadedWorkload w;
    if (ref.generator) {
        Workload gen = generate(*ref.generator);
        w.trace = std::move(gen.trace);
        w.map = std::move(gen.map);
        w.blocks = std::move(gen.blocks);
        w.name = ref.name.empty() ? to_string(ref.generator->pattern) : ref.name;
    } else {
        w.trace = read_trace_file(ref.trace_path);
        w.name = ref.name.empty() ? std::filesystem::path(ref.trace_path).stem().string()
                                  : ref.name;
    }
    if (!ref.map_path.empty()) w.map = read_map_file(ref.map_path);
    if (!ref.blocks_path.empty()) w.blocks = blocks_from_json(read_text_file(ref.blocks_path));
    return w;
}

std::string resolve_out_dir(const ExperimentConfig& config) {
    if (const char* env = std::getenv("TRRIP_OUT"); env && *env) return env;
    return config.out_dir;
}

SimResult run_single(const ExperimentConfig& config, const LoadedWorkload& workload,
                     SimOptions options) {
    HierarchyConfig hc = config.hierarchy;
    hc.seed = config.seed;
    return simulate(workload.trace, workload.map, hc, options);
}

static double reduction_pct(double base, double cand) {
    return base == 0.0 ? 0.0 : 100.0 * (base - cand) / base;
}

CompareReport run_compare(const ExperimentConfig& config) {
    std::vector<LoadedWorkload> workloads;
    for (const auto& ref : config.workloads) workloads.push_back(load_workload(ref));

    std::vector<PolicyKind> policies = config.compare_policies;
    if (policies.empty())
        for (const auto& name : policy_names()) policies.push_back(policy_from_name(name));
    std::erase(policies, config.baseline);

    // One simulation per (policy, workload), fanned out across workers.
    auto run_one = [&](PolicyKind kind, const LoadedWorkload& w) {
        HierarchyConfig hc = config.hierarchy;
        hc.l2.policy = kind;
        hc.seed = config.seed;
        return simulate(w.trace, w.map, hc);
    };

    std::vector<std::future<SimResult>> base_runs;
    for (const auto& w : workloads)
        base_runs.push_back(std::async(std::launch::async, run_one, config.baseline,
                                       std::cref(w)));
    std::vector<std::vector<std::future<SimResult>>> policy_runs;
    for (PolicyKind p : policies) {
        std::vector<std::future<SimResult>> row;
        for (const auto& w : workloads)
            row.push_back(std::async(std::launch::async, run_one, p, std::cref(w)));
        policy_runs.push_back(std::move(row));
    }

    CompareReport report;
    report.baseline = config.baseline;
    std::vector<SimResult> base_results;
    for (size_t i = 0; i < workloads.size(); ++i) {
        base_results.push_back(base_runs[i].get());
        report.workload_names.push_back(workloads[i].name);
        report.baseline_instr_mpki.push_back(base_results[i].instr_mpki());
        report.baseline_data_mpki.push_back(base_results[i].data_mpki());
    }
    report.policies = policies;
    for (size_t pi = 0; pi < policies.size(); ++pi) {
        std::vector<CompareCell> row;
        std::vector<double> instr_reds, data_reds;
        for (size_t wi = 0; wi < workloads.size(); ++wi) {
            SimResult r = policy_runs[pi][wi].get();
            MpkiReduction red = mpki_reduction(base_results[wi], r);
            CompareCell cell;
            cell.instr = red.instr_percent;
            cell.data = red.data_percent;
            cell.defined = red.instr_defined && red.data_defined;
            instr_reds.push_back(red.instr_percent);
            data_reds.push_back(red.data_percent);
            row.push_back(cell);
        }
        CompareCell geo;
        geo.instr = geomean_reduction(instr_reds);
        geo.data = geomean_reduction(data_reds);
        report.geomean.push_back(geo);
        report.cells.push_back(std::move(row));
    }
    return report;
}

std::string CompareReport::to_csv() const {
    std::ostringstream out;
    out << "policy,class";
    for (const auto& n : workload_names) out << ',' << n;
    if (workload_names.size() > 1) out << ",geomean";
    out << '\n';
    out << to_string(baseline) << "_raw_mpki,instr";
    for (double v : baseline_instr_mpki) out << ',' << v;
    if (workload_names.size() > 1) out << ',';
    out << '\n';
    out << to_string(baseline) << "_raw_mpki,data";
    for (double v : baseline_data_mpki) out << ',' << v;
    if (workload_names.size() > 1) out << ',';
    out << '\n';
    for (size_t pi = 0; pi < policies.size(); ++pi) {
        out << to_string(policies[pi]) << ",instr";
        for (const auto& c : cells[pi]) out << ',' << c.instr;
        if (workload_names.size() > 1) out << ',' << geomean[pi].instr;
        out << '\n';
        out << to_string(policies[pi]) << ",data";
        for (const auto& c : cells[pi]) out << ',' << c.data;
        if (workload_names.size() > 1) out << ',' << geomean[pi].data;
        out << '\n';
    }
    return out.str();
}

std::string CompareReport::to_json() const {
    nlohmann::json j;
    j["baseline"] = std::string(to_string(baseline));
    j["workloads"] = workload_names;
    j["baseline_raw_mpki"] = {{"instr", baseline_instr_mpki},
                              {"data", baseline_data_mpki}};
    nlohmann::json pol = nlohmann::json::array();
    for (size_t pi = 0; pi < policies.size(); ++pi) {
        nlohmann::json e;
        e["policy"] = std::string(to_string(policies[pi]));
        nlohmann::json reds = nlohmann::json::array();
        for (const auto& c : cells[pi])
            reds.push_back({{"instr", c.instr}, {"data", c.data}});
        e["reduction_percent"] = reds;
        e["geomean"] = {{"instr", geomean[pi].instr}, {"data", geomean[pi].data}};
        pol.push_back(e);
    }
    j["policies"] = pol;
    return j.dump(2);
}

std::string CompareReport::to_text() const {
    std::ostringstream out;
    out << "L2 MPKI reduction vs " << to_string(baseline) << " (%)\n";
    char buf[64];
    snprintf(buf, sizeof buf, "%-10s %-6s", "policy", "class");
    out << buf;
    for (const auto& n : workload_names) {
        snprintf(buf, sizeof buf, " %12s", n.c_str());
        out << buf;
    }
    if (workload_names.size() > 1) out << "      geomean";
    out << '\n';
    auto row = [&](const std::string& name, const char* cls,
                   const std::vector<double>& vals, const double* geo) {
        snprintf(buf, sizeof buf, "%-10s %-6s", name.c_str(), cls);
        out << buf;
        for (double v : vals) {
            snprintf(buf, sizeof buf, " %12.2f", v);
            out << buf;
        }
        if (geo) {
            snprintf(buf, sizeof buf, " %12.2f", *geo);
            out << buf;
        }
        out << '\n';
    };
    row(std::string(to_string(baseline)) + "(raw)", "instr", baseline_instr_mpki, nullptr);
    row(std::string(to_string(baseline)) + "(raw)", "data", baseline_data_mpki, nullptr);
    for (size_t pi = 0; pi < policies.size(); ++pi) {
        std::vector<double> iv, dv;
        for (const auto& c : cells[pi]) {
            iv.push_back(c.instr);
            dv.push_back(c.data);
        }
        bool multi = workload_names.size() > 1;
        row(to_string(policies[pi]), "instr", iv, multi ? &geomean[pi].instr : nullptr);
        row(to_string(policies[pi]), "data", dv, multi ? &geomean[pi].data : nullptr);
    }
    return out.str();
}

SweepTable run_sweep(const ExperimentConfig& config) {
    if (config.sweep_axis.empty()) throw ConfigError("sweep: no axis configured");
    if (config.sweep_values.empty()) throw ConfigError("sweep: no values configured");
    LoadedWorkload workload = load_workload(config.workloads.at(0));

    SweepTable table;
    table.axis = config.sweep_axis;
    table.candidate = config.hierarchy.l2.policy;
    table.baseline = config.baseline;

    auto point = [&](double value) {
        HierarchyConfig hc = config.hierarchy;
        hc.seed = config.seed;
        TemperatureMap map = workload.map;
        if (config.sweep_axis == "percentile_hot") {
            if (workload.blocks.empty())
                throw ConfigError("sweep percentile_hot: workload has no block table");
            ThresholdParams t = config.thresholds;
            t.percentile_hot = value;
            t.percentile_cold = std::max(t.percentile_cold, value);
            map = derive_block_map(workload.blocks, t, workload.map.page_size);
        } else if (config.sweep_axis == "page_size") {
            if (workload.blocks.empty())
                throw ConfigError("sweep page_size: workload has no block table");
            map = derive_block_map(workload.blocks, config.thresholds, uint64_t(value));
        } else if (config.sweep_axis == "l2_capacity") {
            hc.l2.geometry.capacity_bytes = uint64_t(value);
        } else if (config.sweep_axis == "l2_associativity") {
            hc.l2.geometry.associativity = uint32_t(value);
        } else {
            throw ConfigError("sweep: unknown axis '" + config.sweep_axis +
                              "' (valid: percentile_hot, page_size, l2_capacity, "
                              "l2_associativity)");
        }
        HierarchyConfig base_hc = hc;
        base_hc.l2.policy = config.baseline;
        SimResult cand = simulate(workload.trace, map, hc);
        SimResult base = simulate(workload.trace, map, base_hc);
        SweepRow row;
        row.value = value;
        row.candidate_instr_mpki = cand.instr_mpki();
        row.candidate_data_mpki = cand.data_mpki();
        row.baseline_instr_mpki = base.instr_mpki();
        row.baseline_data_mpki = base.data_mpki();
        row.instr_reduction_percent =
            reduction_pct(row.baseline_instr_mpki, row.candidate_instr_mpki);
        row.data_reduction_percent =
            reduction_pct(row.baseline_data_mpki, row.candidate_data_mpki);
        return row;
    };

    std::vector<std::future<SweepRow>> futures;
    for (double v : config.sweep_values)
        futures.push_back(std::async(std::launch::async, point, v));
    for (auto& f : futures) table.rows.push_back(f.get());
    return table;
}

std::string SweepTable::to_csv() const {
    std::ostringstream out;
    out << "axis,value,candidate_instr_mpki,candidate_data_mpki,baseline_instr_mpki,"
           "baseline_data_mpki,instr_reduction_percent,data_reduction_percent\n";
    for (const auto& r : rows) {
        out << axis << ',' << r.value << ',' << r.candidate_instr_mpki << ','
            << r.candidate_data_mpki << ',' << r.baseline_instr_mpki << ','
            << r.baseline_data_mpki << ',' << r.instr_reduction_percent << ','
            << r.data_reduction_percent << '\n';
    }
    return out.str();
}

std::string SweepTable::to_json() const {
    nlohmann::json j;
    j["axis"] = axis;
    j["candidate"] = std::string(to_string(candidate));
    j["baseline"] = std::string(to_string(baseline));
    nlohmann::json rows_j = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_j.push_back({{"value", r.value},
                          {"candidate_instr_mpki", r.candidate_instr_mpki},
                          {"candidate_data_mpki", r.candidate_data_mpki},
                          {"baseline_instr_mpki", r.baseline_instr_mpki},
                          {"baseline_data_mpki", r.baseline_data_mpki},
                          {"instr_reduction_percent", r.instr_reduction_percent},
                          {"data_reduction_percent", r.data_reduction_percent}});
    }
    j["rows"] = rows_j;
    return j.dump(2);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace trrip

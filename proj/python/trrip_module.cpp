#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "trrip/analysis.hpp"
#include "trrip/experiment.hpp"
#include "trrip/hierarchy.hpp"
#include "trrip/temperature.hpp"
#include "trrip/trace.hpp"

namespace py = pybind11;
using namespace trrip;

namespace {

std::vector<MemoryAccess> trace_from_tuples(
    const std::vector<std::tuple<std::string, uint64_t, uint64_t>>& records) {
    std::vector<MemoryAccess> trace;
    trace.reserve(records.size());
    for (const auto& [kind, vaddr, pc] : records) {
        MemoryAccess a;
        if (kind == "I")
            a.kind = AccessKind::InstrFetch;
        else if (kind == "L")
            a.kind = AccessKind::DataLoad;
        else if (kind == "S")
            a.kind = AccessKind::DataStore;
        else
            throw DataError("access kind must be I, L, or S");
        a.vaddr = vaddr;
        a.pc = pc;
        trace.push_back(a);
    }
    return trace;
}

py::dict result_to_dict(const SimResult& r) {
    py::dict out;
    auto level = [](const LevelStats& s) {
        py::dict d;
        d["instr"] = py::dict(py::arg("accesses") = s.instr.accesses,
                              py::arg("hits") = s.instr.hits,
                              py::arg("misses") = s.instr.misses);
        d["data"] = py::dict(py::arg("accesses") = s.data.accesses,
                             py::arg("hits") = s.data.hits,
                             py::arg("misses") = s.data.misses);
        return d;
    };
    out["l1i"] = level(r.l1i);
    out["l1d"] = level(r.l1d);
    out["l2"] = level(r.l2);
    out["slc"] = level(r.slc);
    out["retired_instructions"] = r.retired_instructions;
    out["total_accesses"] = r.total_accesses;
    if (r.retired_instructions > 0) {
        out["l2_instr_mpki"] = r.instr_mpki();
        out["l2_data_mpki"] = r.data_mpki();
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_trrip, m) {
    m.doc() = "trace-driven cache simulator with temperature-guided replacement";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DataError>(m, "DataError");

    m.def("line_of", &line_of, py::arg("vaddr"), py::arg("line_size") = 64);
    m.def("set_index", &set_index, py::arg("line_number"), py::arg("set_count"));
    m.def("mpki", &mpki, py::arg("misses"), py::arg("retired"));

    m.def(
        "hot_count_threshold",
        [](const std::vector<std::tuple<std::string, uint64_t, uint64_t>>& blocks,
           double percentile) {
            std::vector<ProfiledBlock> bs;
            for (const auto& [id, size, count] : blocks) bs.push_back({id, size, count});
            return hot_count_threshold(bs, percentile);
        },
        py::arg("blocks"), py::arg("percentile"),
        "C_n from (id, size, count) blocks at the given percentile");

    m.def(
        "classify",
        [](const std::vector<std::tuple<std::string, uint64_t, uint64_t>>& blocks,
           double percentile_hot, double percentile_cold) {
            std::vector<ProfiledBlock> bs;
            for (const auto& [id, size, count] : blocks) bs.push_back({id, size, count});
            auto temps = classify(bs, {percentile_hot, percentile_cold});
            py::dict out;
            for (const auto& [id, t] : temps) out[py::str(id)] = to_string(t);
            return out;
        },
        py::arg("blocks"), py::arg("percentile_hot") = 0.99,
        py::arg("percentile_cold") = 0.9999,
        "per-block temperature name for (id, size, count) blocks");

    m.def(
        "generate",
        [](const std::string& spec_json) {
            Workload w = generate(PatternSpec::from_json(spec_json));
            py::list trace;
            for (const auto& a : w.trace) {
                const char* k = a.kind == AccessKind::InstrFetch  ? "I"
                                : a.kind == AccessKind::DataLoad ? "L"
                                                                 : "S";
                trace.append(py::make_tuple(k, a.vaddr, a.pc));
            }
            py::dict out;
            out["trace"] = trace;
            out["map_json"] = map_to_json(w.map);
            out["blocks_json"] = blocks_to_json(w.blocks);
            return out;
        },
        py::arg("spec_json"), "generate a workload from a pattern spec");

    m.def(
        "simulate",
        [](const std::vector<std::tuple<std::string, uint64_t, uint64_t>>& records,
           const std::string& map_json, const std::string& hierarchy_json) {
            auto trace = trace_from_tuples(records);
            TemperatureMap map;
            if (!map_json.empty()) map = map_from_json(map_json);
            HierarchyConfig hc = hierarchy_json.empty()
                                     ? HierarchyConfig::defaults()
                                     : hierarchy_from_json(hierarchy_json);
            return result_to_dict(simulate(trace, map, hc));
        },
        py::arg("trace"), py::arg("map_json") = std::string(),
        py::arg("hierarchy_json") = std::string(),
        "simulate (kind, vaddr, pc) records through the hierarchy");

    m.def(
        "simulate_files",
        [](const std::string& trace_path, const std::string& map_path,
           const std::string& hierarchy_json) {
            auto trace = read_trace_file(trace_path);
            TemperatureMap map;
            if (!map_path.empty()) map = read_map_file(map_path);
            HierarchyConfig hc = hierarchy_json.empty()
                                     ? HierarchyConfig::defaults()
                                     : hierarchy_from_json(hierarchy_json);
            return result_to_dict(simulate(trace, map, hc));
        },
        py::arg("trace_path"), py::arg("map_path") = std::string(),
        py::arg("hierarchy_json") = std::string());

    m.def(
        "write_trace",
        [](const std::string& path,
           const std::vector<std::tuple<std::string, uint64_t, uint64_t>>& records,
           const std::string& format) {
            write_trace_file(path, trace_from_tuples(records),
                             format == "text" ? TraceFormat::Text : TraceFormat::Binary);
        },
        py::arg("path"), py::arg("trace"), py::arg("format") = "binary");

    m.def(
        "read_trace",
        [](const std::string& path) {
            py::list out;
            for (const auto& a : read_trace_file(path)) {
                const char* k = a.kind == AccessKind::InstrFetch  ? "I"
                                : a.kind == AccessKind::DataLoad ? "L"
                                                                 : "S";
                out.append(py::make_tuple(k, a.vaddr, a.pc));
            }
            return out;
        },
        py::arg("path"));

    m.def(
        "reuse_histogram",
        [](const std::vector<std::tuple<std::string, uint64_t, uint64_t>>& records,
           const std::string& map_json, uint64_t capacity, uint32_t assoc,
           uint32_t line_size, const std::string& mode) {
            auto trace = trace_from_tuples(records);
            TemperatureMap map;
            if (!map_json.empty()) map = map_from_json(map_json);
            CacheGeometry geom{capacity, assoc, line_size};
            ReuseHistogram h = reuse_distances(
                trace, map, geom,
                mode == "hot_only" ? ReuseMode::HotOnly : ReuseMode::Base);
            py::dict out;
            py::list bins;
            for (size_t k = 0; k < h.bin_counts.size(); ++k)
                bins.append(py::make_tuple(h.bin_label(k), h.bin_counts[k]));
            out["bins"] = bins;
            out["total_hot_accesses"] = h.total_hot_accesses;
            out["measured_reaccesses"] = h.measured_reaccesses;
            return out;
        },
        py::arg("trace"), py::arg("map_json") = std::string(),
        py::arg("capacity") = 512 * 1024, py::arg("assoc") = 8,
        py::arg("line_size") = 64, py::arg("mode") = "base");

    m.def(
        "mpki_reduction",
        [](double baseline_mpki, double candidate_mpki) {
            if (baseline_mpki == 0.0) throw DataError("baseline mpki is zero");
            return 100.0 * (baseline_mpki - candidate_mpki) / baseline_mpki;
        },
        py::arg("baseline_mpki"), py::arg("candidate_mpki"));

    m.def("geomean_reduction",
          [](const std::vector<double>& reductions) { return geomean_reduction(reductions); });

    m.attr("__version__") = "0.1.0";
}

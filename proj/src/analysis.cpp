#include "trrip/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace trrip {

size_t ReuseHistogram::bin_for(uint64_t distance) const {
    for (size_t k = 0; k < bin_edges.size(); ++k)
        if (distance <= bin_edges[k]) return k;
    return bin_edges.size();
}

std::string ReuseHistogram::bin_label(size_t k) const {
    if (k >= bin_edges.size()) return ">" + std::to_string(bin_edges.back());
    uint64_t lo = k == 0 ? 0 : bin_edges[k - 1] + 1;
    return std::to_string(lo) + "-" + std::to_string(bin_edges[k]);
}

std::string ReuseHistogram::to_csv() const {
    std::ostringstream out;
    out << "bin,count,fraction\n";
    for (size_t k = 0; k < bin_counts.size(); ++k) {
        double frac = measured_reaccesses
                          ? double(bin_counts[k]) / double(measured_reaccesses)
                          : 0.0;
        out << bin_label(k) << ',' << bin_counts[k] << ',' << frac << '\n';
    }
    return out.str();
}

std::string ReuseHistogram::to_json() const {
    nlohmann::json j;
    j["mode"] = mode == ReuseMode::Base ? "base" : "hot_only";
    j["bin_edges"] = bin_edges;
    nlohmann::json bins = nlohmann::json::array();
    for (size_t k = 0; k < bin_counts.size(); ++k)
        bins.push_back({{"bin", bin_label(k)}, {"count", bin_counts[k]}});
    j["bins"] = bins;
    j["total_hot_accesses"] = total_hot_accesses;
    j["measured_reaccesses"] = measured_reaccesses;
    return j.dump(2);
}

namespace {

// Fenwick tree over access timestamps; one marker per line at its most
// recent access. The count of markers inside a window equals the number of
// distinct lines touched there.
struct Fenwick {
    std::vector<int32_t> tree;
    explicit Fenwick(size_t n) : tree(n + 1, 0) {}
    void add(size_t i, int32_t d) {
        for (++i; i < tree.size(); i += i & (~i + 1)) tree[i] += d;
    }
    int32_t prefix(size_t i) const {  // sum of [0, i)
        int32_t s = 0;
        for (; i > 0; i -= i & (~i + 1)) s += tree[i];
        return s;
    }
    int32_t range(size_t lo, size_t hi) const {  // [lo, hi)
        return hi <= lo ? 0 : prefix(hi) - prefix(lo);
    }
};

struct SetTracker {
    std::vector<size_t> times;  // local timestamps of this set's accesses
    std::unordered_map<uint64_t, size_t> last_pos;     // line -> local index
    std::unordered_map<uint64_t, size_t> marker_pos;   // line -> marker index
};

}  // namespace

std::vector<uint64_t> reuse_distance_samples(std::span<const ReuseInput> stream,
                                             uint64_t set_count, ReuseMode mode) {
    // Pass 1: per-set access counts for Fenwick sizing.
    std::unordered_map<uint64_t, size_t> set_sizes;
    for (const auto& e : stream) ++set_sizes[set_index(e.line, set_count)];

    std::unordered_map<uint64_t, Fenwick> fw;
    std::unordered_map<uint64_t, SetTracker> trackers;
    std::unordered_map<uint64_t, size_t> clock;
    fw.reserve(set_sizes.size());
    for (const auto& [s, n] : set_sizes) fw.emplace(s, Fenwick(n));

    std::vector<uint64_t> samples;
    for (const auto& e : stream) {
        uint64_t s = set_index(e.line, set_count);
        Fenwick& f = fw.at(s);
        SetTracker& tr = trackers[s];
        size_t t = clock[s]++;

        // Reuse windows anchor on any access to the line; the line's own
        // marker therefore never falls inside its window.
        if (e.is_hot && e.is_instr) {
            auto last = tr.last_pos.find(e.line);
            if (last != tr.last_pos.end())
                samples.push_back(uint64_t(f.range(last->second + 1, t)));
        }
        tr.last_pos[e.line] = t;

        bool counted = (mode == ReuseMode::Base) || e.is_hot;
        if (counted) {
            auto mk = tr.marker_pos.find(e.line);
            if (mk != tr.marker_pos.end()) f.add(mk->second, -1);
            f.add(t, +1);
            tr.marker_pos[e.line] = t;
        }
    }
    return samples;
}

static ReuseHistogram build_histogram(std::span<const ReuseInput> stream,
                                      uint64_t set_count, ReuseMode mode,
                                      std::span<const uint64_t> bin_edges) {
    ReuseHistogram h;
    h.mode = mode;
    if (!bin_edges.empty()) h.bin_edges.assign(bin_edges.begin(), bin_edges.end());
    h.bin_counts.assign(h.bin_edges.size() + 1, 0);
    for (const auto& e : stream)
        if (e.is_hot && e.is_instr) ++h.total_hot_accesses;
    for (uint64_t d : reuse_distance_samples(stream, set_count, mode)) {
        ++h.bin_counts[h.bin_for(d)];
        ++h.measured_reaccesses;
    }
    return h;
}

ReuseHistogram reuse_distances(std::span<const ReuseInput> stream, uint64_t set_count,
                               ReuseMode mode, std::span<const uint64_t> bin_edges) {
    if (!is_pow2(set_count)) throw ConfigError("reuse_distances: set count must be a power of two");
    return build_histogram(stream, set_count, mode, bin_edges);
}

ReuseHistogram reuse_distances(std::span<const MemoryAccess> trace,
                               const TemperatureMap& map, const CacheGeometry& geometry,
                               ReuseMode mode, std::span<const uint64_t> bin_edges) {
    geometry.validate();
    std::vector<ReuseInput> stream;
    stream.reserve(trace.size());
    for (const auto& a : trace) {
        ReuseInput e;
        e.line = line_of(a.vaddr, geometry.line_size_bytes);
        e.is_instr = a.is_instr();
        e.is_hot = a.is_instr() && map.lookup(a.vaddr) == Temperature::Hot;
        stream.push_back(e);
    }
    return build_histogram(stream, geometry.set_count(), mode, bin_edges);
}

std::string CoverageCurve::to_csv() const {
    std::ostringstream out;
    out << "percentile,coverage\n";
    for (size_t i = 0; i < percentiles.size(); ++i)
        out << percentiles[i] << ',' << coverage[i] << '\n';
    return out.str();
}

std::string CoverageCurve::to_json() const {
    nlohmann::json j;
    j["filter"] = filter == CoverageFilter::All ? "all" : "exclude_external";
    nlohmann::json pts = nlohmann::json::array();
    for (size_t i = 0; i < percentiles.size(); ++i)
        pts.push_back({{"percentile", percentiles[i]}, {"coverage", coverage[i]}});
    j["points"] = pts;
    return j.dump(2);
}

CoverageCurve costly_coverage(std::span<const MissRecord> miss_log, CoverageFilter filter,
                              std::span<const uint32_t> percentiles) {
    CoverageCurve curve;
    curve.filter = filter;
    if (!percentiles.empty())
        curve.percentiles.assign(percentiles.begin(), percentiles.end());

    struct Entry {
        uint64_t line;
        Temperature temp;
        ServiceLevel service;
        uint64_t line_misses;
    };
    std::unordered_map<uint64_t, uint64_t> per_line;
    for (const auto& m : miss_log)
        if (m.cls == LineClass::Instruction) ++per_line[m.line];

    std::vector<Entry> entries;
    for (const auto& m : miss_log) {
        if (m.cls != LineClass::Instruction) continue;
        if (filter == CoverageFilter::ExcludeExternal && m.temp == Temperature::None)
            continue;
        entries.push_back({m.line, m.temp, m.service, per_line[m.line]});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.service != b.service) return a.service > b.service;  // memory costliest
        if (a.line_misses != b.line_misses) return a.line_misses > b.line_misses;
        return a.line < b.line;
    });

    for (uint32_t n : curve.percentiles) {
        if (entries.empty()) {
            curve.coverage.push_back(0.0);
            continue;
        }
        size_t k = size_t(std::llround(double(n) * double(entries.size()) / 100.0));
        k = std::clamp<size_t>(k, 1, entries.size());
        size_t hot = 0;
        for (size_t i = 0; i < k; ++i)
            if (entries[i].temp == Temperature::Hot) ++hot;
        curve.coverage.push_back(double(hot) / double(k));
    }
    return curve;
}

MpkiReduction mpki_reduction(const SimResult& baseline, const SimResult& candidate) {
    if (baseline.retired_instructions != candidate.retired_instructions)
        throw ConfigError("mpki_reduction: runs cover different retired counts");
    MpkiReduction r;
    auto one = [&](uint64_t base_miss, uint64_t cand_miss, double& pct, bool& defined) {
        double base = mpki(base_miss, baseline.retired_instructions);
        double cand = mpki(cand_miss, candidate.retired_instructions);
        if (base == 0.0) {
            defined = false;
            pct = 0.0;
            return;
        }
        pct = 100.0 * (base - cand) / base;
    };
    one(baseline.l2.instr.misses, candidate.l2.instr.misses, r.instr_percent,
        r.instr_defined);
    one(baseline.l2.data.misses, candidate.l2.data.misses, r.data_percent, r.data_defined);
    return r;
}

double geomean_reduction(std::span<const double> reductions_percent) {
    if (reductions_percent.empty()) return 0.0;
    double log_sum = 0.0;
    for (double r : reductions_percent) {
        double factor = 1.0 + r / 100.0;
        if (factor <= 0.0)
            throw DataError("geomean undefined: reduction at or below -100%");
        log_sum += std::log(factor);
    }
    return (std::exp(log_sum / double(reductions_percent.size())) - 1.0) * 100.0;
}

}  // namespace trrip

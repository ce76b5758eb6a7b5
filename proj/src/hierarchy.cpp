#include "trrip/hierarchy.hpp"

#include <sstream>

#include <json.hpp>

namespace trrip {

HierarchyConfig HierarchyConfig::defaults(PolicyKind l2_policy) {
    HierarchyConfig c;
    c.l1i.geometry = {64 * 1024, 4, 64};
    c.l1i.policy = PolicyKind::Lru;
    c.l1d.geometry = {64 * 1024, 4, 64};
    c.l1d.policy = PolicyKind::Lru;
    c.l2.geometry = {512 * 1024, 8, 64};
    c.l2.policy = l2_policy;
    c.slc.geometry = {1024 * 1024, 16, 64};
    c.slc.policy = PolicyKind::Lru;
    return c;
}

HierarchyConfig HierarchyConfig::single_level(const CacheGeometry& geom, PolicyKind policy,
                                              const PolicyParams& params, uint64_t seed) {
    HierarchyConfig c;
    c.l1i.enabled = false;
    c.l1d.enabled = false;
    c.slc.enabled = false;
    c.l2.geometry = geom;
    c.l2.policy = policy;
    c.l2.policy_params = params;
    c.seed = seed;
    return c;
}

void HierarchyConfig::validate() const {
    if (!l2.enabled) throw ConfigError("hierarchy: L2 level cannot be disabled");
    l2.geometry.validate();
    uint32_t line = l2.geometry.line_size_bytes;
    for (const LevelConfig* lc : {&l1i, &l1d, &slc}) {
        if (!lc->enabled) continue;
        lc->geometry.validate();
        if (lc->geometry.line_size_bytes != line)
            throw ConfigError("hierarchy: all levels must share one line size");
    }
    if (l1i.enabled != l1d.enabled)
        throw ConfigError("hierarchy: L1-I and L1-D must be enabled together");
}

namespace {

struct WayState {
    bool valid = false;
    uint64_t line = 0;
    LineClass cls = LineClass::Instruction;
};

enum LevelIdx : uint32_t { L1I = 0, L1D = 1, L2 = 2, SLC = 3 };

struct Level {
    bool enabled = false;
    uint32_t sets = 0;
    uint32_t ways = 0;
    uint32_t prefetch_degree = 0;
    std::vector<WayState> state;
    std::unique_ptr<ReplacementPolicy> policy;
    LevelStats stats;

    void init(const LevelConfig& cfg, uint64_t policy_seed) {
        enabled = cfg.enabled;
        if (!enabled) return;
        sets = uint32_t(cfg.geometry.set_count());
        ways = cfg.geometry.associativity;
        prefetch_degree = cfg.prefetch_degree;
        state.assign(size_t(sets) * ways, WayState{});
        policy = make_policy(cfg.policy, sets, ways, cfg.policy_params, policy_seed);
    }

    uint32_t set_of(uint64_t line) const { return uint32_t(set_index(line, sets)); }
    WayState& at(uint32_t set, uint32_t way) { return state[size_t(set) * ways + way]; }
    const WayState& at(uint32_t set, uint32_t way) const {
        return state[size_t(set) * ways + way];
    }

    // Returns the way holding `line`, or `ways` when absent.
    uint32_t probe(uint64_t line) const {
        uint32_t set = set_of(line);
        for (uint32_t w = 0; w < ways; ++w) {
            const WayState& ws = at(set, w);
            if (ws.valid && ws.line == line) return w;
        }
        return ways;
    }

    ClassCounters& counters(LineClass cls) {
        return cls == LineClass::Instruction ? stats.instr : stats.data;
    }
};

}  // namespace

struct Hierarchy::Impl {
    HierarchyConfig config;
    TemperatureMap map;
    SimOptions options;
    Level levels[4];
    SimResult res;
    uint32_t line_size = 64;

    Impl(const HierarchyConfig& cfg, const TemperatureMap& m, SimOptions opt)
        : config(cfg), map(m), options(opt) {
        config.validate();
        line_size = config.l2.geometry.line_size_bytes;
        const LevelConfig* cfgs[4] = {&config.l1i, &config.l1d, &config.l2, &config.slc};
        for (uint32_t i = 0; i < 4; ++i)
            levels[i].init(*cfgs[i], mix64(config.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1))));
    }

    Temperature line_temp(uint64_t line, LineClass cls) const {
        if (cls != LineClass::Instruction) return Temperature::None;
        return map.lookup(line * line_size);
    }

    void invalidate_in(Level& lv, uint64_t line, bool count_back_invalidation) {
        if (!lv.enabled) return;
        uint32_t way = lv.probe(line);
        if (way == lv.ways) return;
        uint32_t set = lv.set_of(line);
        lv.at(set, way).valid = false;
        lv.policy->on_invalidate(set, way);
        if (count_back_invalidation) ++lv.stats.invalidations;
    }

    // Insert `line` into a level, evicting if needed. Returns false when the
    // line was already present, true otherwise.
    bool fill(uint32_t level_idx, uint64_t line, const AccessInfo& info) {
        Level& lv = levels[level_idx];
        uint32_t set = lv.set_of(line);
        uint32_t way = lv.ways;
        for (uint32_t w = 0; w < lv.ways; ++w) {
            const WayState& ws = lv.at(set, w);
            if (ws.valid && ws.line == line) return false;
            if (!ws.valid && way == lv.ways) way = w;
        }
        if (way == lv.ways) {
            way = lv.policy->choose_victim(set);
            WayState victim = lv.at(set, way);
            lv.policy->on_evict(set, way);
            ++lv.stats.evictions_by_temp[size_t(line_temp(victim.line, victim.cls))];
            lv.at(set, way).valid = false;
            if (level_idx == L2) {
                // Inclusive L2: back-invalidate the L1s, then hand the victim
                // to the exclusive SLC.
                invalidate_in(levels[L1I], victim.line, true);
                invalidate_in(levels[L1D], victim.line, true);
                if (levels[SLC].enabled) {
                    AccessInfo spill;
                    spill.cls = victim.cls;
                    spill.temp = line_temp(victim.line, victim.cls);
                    spill.demand = false;
                    fill(SLC, victim.line, spill);
                }
            }
        }
        WayState& ws = lv.at(set, way);
        ws.valid = true;
        ws.line = line;
        ws.cls = info.cls;
        lv.policy->on_fill(set, way, info);
        return true;
    }

    // Demand request arriving at L2 after missing (or bypassing) L1.
    ServiceLevel l2_request(uint64_t line, const AccessInfo& info, bool& l2_hit) {
        Level& l2 = levels[L2];
        ++l2.counters(info.cls).accesses;
        if (options.log_l2_stream)
            res.l2_stream.push_back({line, info.cls, info.temp});

        uint32_t way = l2.probe(line);
        if (way != l2.ways) {
            ++l2.counters(info.cls).hits;
            l2.policy->on_hit(l2.set_of(line), way, info);
            l2_hit = true;
            return ServiceLevel::L2;
        }
        ++l2.counters(info.cls).misses;
        l2.policy->on_demand_miss(l2.set_of(line));
        l2_hit = false;

        ServiceLevel service = ServiceLevel::Memory;
        Level& slc = levels[SLC];
        if (slc.enabled) {
            ++slc.counters(info.cls).accesses;
            uint32_t sway = slc.probe(line);
            if (sway != slc.ways) {
                ++slc.counters(info.cls).hits;
                // Exclusive: the line moves up to L2.
                invalidate_in(slc, line, false);
                service = ServiceLevel::Slc;
            } else {
                ++slc.counters(info.cls).misses;
            }
        }

        AccessInfo fill_info = info;
        fill_info.costly = info.demand && info.cls == LineClass::Instruction;
        fill(L2, line, fill_info);

        if (l2.prefetch_degree > 0) prefetch(L2, line, info.cls);
        return service;
    }

    void prefetch(uint32_t level_idx, uint64_t missed_line, LineClass cls) {
        Level& lv = levels[level_idx];
        for (uint32_t d = 1; d <= lv.prefetch_degree; ++d) {
            uint64_t pline = missed_line + d;
            if (lv.probe(pline) != lv.ways) continue;
            AccessInfo pf;
            pf.cls = cls;
            pf.temp = line_temp(pline, cls);
            pf.demand = false;
            if (level_idx != L2 && levels[L2].probe(pline) == levels[L2].ways) {
                // Keep L2 inclusive of an L1 prefetch fill.
                invalidate_in(levels[SLC], pline, false);
                fill(L2, pline, pf);
            }
            if (level_idx == L2) invalidate_in(levels[SLC], pline, false);
            if (fill(level_idx, pline, pf)) ++lv.stats.prefetch_fills;
        }
    }

    Outcome access(const MemoryAccess& a) {
        ++res.total_accesses;
        if (a.is_instr()) ++res.retired_instructions;

        uint64_t line = line_of(a.vaddr, line_size);
        AccessInfo info;
        info.cls = a.line_class();
        info.temp = a.is_instr() ? map.lookup(a.vaddr) : Temperature::None;
        info.pc_line = line_of(a.pc, line_size);
        info.demand = true;

        Outcome out;
        Level& l1 = a.is_instr() ? levels[L1I] : levels[L1D];
        if (l1.enabled) {
            ++l1.counters(info.cls).accesses;
            uint32_t way = l1.probe(line);
            if (way != l1.ways) {
                ++l1.counters(info.cls).hits;
                l1.policy->on_hit(l1.set_of(line), way, info);
                out.l1_hit = true;
                out.l2_hit = false;
                out.service = ServiceLevel::L2;
                return out;
            }
            ++l1.counters(info.cls).misses;
            l1.policy->on_demand_miss(l1.set_of(line));
        }

        out.service = l2_request(line, info, out.l2_hit);
        ++res.service_histogram[size_t(out.service)];
        if (!out.l2_hit && options.log_misses)
            res.miss_log.push_back({line, info.cls, info.temp, out.service});

        if (l1.enabled) {
            fill(a.is_instr() ? L1I : L1D, line, info);
            if (l1.prefetch_degree > 0)
                prefetch(a.is_instr() ? L1I : L1D, line, info.cls);
        }
        return out;
    }

    const SimResult& result() {
        res.l1i = levels[L1I].stats;
        res.l1d = levels[L1D].stats;
        res.l2 = levels[L2].stats;
        res.slc = levels[SLC].stats;
        return res;
    }

    void full_audit() const {
        const Level& l2 = levels[L2];
        for (const Level* l1 : {&levels[L1I], &levels[L1D]}) {
            if (!l1->enabled) continue;
            for (uint32_t s = 0; s < l1->sets; ++s)
                for (uint32_t w = 0; w < l1->ways; ++w) {
                    const WayState& ws = l1->at(s, w);
                    if (ws.valid && l2.probe(ws.line) == l2.ways)
                        throw std::logic_error("inclusion violated: L1 line absent from L2");
                }
        }
        const Level& slc = levels[SLC];
        if (slc.enabled) {
            for (uint32_t s = 0; s < slc.sets; ++s)
                for (uint32_t w = 0; w < slc.ways; ++w) {
                    const WayState& ws = slc.at(s, w);
                    if (ws.valid && l2.probe(ws.line) != l2.ways)
                        throw std::logic_error("exclusivity violated: line in both L2 and SLC");
                }
        }
        for (const Level& lv : levels) {
            if (!lv.enabled) continue;
            for (uint32_t s = 0; s < lv.sets; ++s) {
                lv.policy->audit_set(s);
                for (uint32_t w = 0; w < lv.ways; ++w) {
                    const WayState& ws = lv.at(s, w);
                    if (!ws.valid) continue;
                    for (uint32_t v = w + 1; v < lv.ways; ++v)
                        if (lv.at(s, v).valid && lv.at(s, v).line == ws.line)
                            throw std::logic_error("duplicate tag within a set");
                }
            }
        }
    }
};

Hierarchy::Hierarchy(const HierarchyConfig& config, const TemperatureMap& map,
                     SimOptions options)
    : impl_(std::make_unique<Impl>(config, map, options)) {}

Hierarchy::~Hierarchy() = default;

Hierarchy::Outcome Hierarchy::access(const MemoryAccess& a) { return impl_->access(a); }

const SimResult& Hierarchy::result() const { return impl_->result(); }

const ReplacementPolicy& Hierarchy::l2_policy() const { return *impl_->levels[L2].policy; }

void Hierarchy::full_audit() const { impl_->full_audit(); }

SimResult simulate(std::span<const MemoryAccess> trace, const TemperatureMap& map,
                   const HierarchyConfig& config, SimOptions options) {
    if (trace.empty()) throw DataError("simulate: empty trace");
    Hierarchy h(config, map, options);
    for (const MemoryAccess& a : trace) h.access(a);
    return h.result();
}

static nlohmann::json stats_json(const LevelStats& s) {
    nlohmann::json j;
    j["instr"] = {{"accesses", s.instr.accesses},
                  {"hits", s.instr.hits},
                  {"misses", s.instr.misses}};
    j["data"] = {{"accesses", s.data.accesses},
                 {"hits", s.data.hits},
                 {"misses", s.data.misses}};
    j["evictions_by_temp"] = {{"none", s.evictions_by_temp[0]},
                              {"hot", s.evictions_by_temp[1]},
                              {"warm", s.evictions_by_temp[2]},
                              {"cold", s.evictions_by_temp[3]}};
    j["invalidations"] = s.invalidations;
    j["prefetch_fills"] = s.prefetch_fills;
    return j;
}

std::string SimResult::to_json() const {
    nlohmann::json j;
    j["levels"] = {{"l1i", stats_json(l1i)},
                   {"l1d", stats_json(l1d)},
                   {"l2", stats_json(l2)},
                   {"slc", stats_json(slc)}};
    j["service_histogram"] = {{"l2", service_histogram[0]},
                              {"slc", service_histogram[1]},
                              {"memory", service_histogram[2]}};
    j["retired_instructions"] = retired_instructions;
    j["total_accesses"] = total_accesses;
    if (retired_instructions > 0) {
        j["l2_mpki"] = {{"instr", instr_mpki()}, {"data", data_mpki()}};
    }
    return j.dump(2);
}

std::string SimResult::to_csv() const {
    std::ostringstream out;
    out << "level,class,accesses,hits,misses\n";
    auto row = [&](const char* level, const char* cls, const ClassCounters& c) {
        out << level << ',' << cls << ',' << c.accesses << ',' << c.hits << ','
            << c.misses << '\n';
    };
    row("l1i", "instr", l1i.instr);
    row("l1d", "data", l1d.data);
    row("l2", "instr", l2.instr);
    row("l2", "data", l2.data);
    row("slc", "instr", slc.instr);
    row("slc", "data", slc.data);
    return out.str();
}

}  // namespace trrip

#include "trrip/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace trrip {

namespace {

void put_u64le(std::ostream& out, uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = char(v >> (8 * i));
    out.write(buf, 8);
}

uint64_t get_u64le(const char* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(p[i])) << (8 * i);
    return v;
}

char kind_letter(AccessKind k) {
    switch (k) {
    case AccessKind::InstrFetch: return 'I';
    case AccessKind::DataLoad: return 'L';
    case AccessKind::DataStore: return 'S';
    }
    return '?';
}

uint64_t parse_hex(const std::string& field, size_t record, const char* what) {
    size_t pos = 0;
    if (field.size() > 2 && field[0] == '0' && (field[1] == 'x' || field[1] == 'X'))
        pos = 2;
    uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(field.data() + pos, field.data() + field.size(),
                                     value, 16);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw DataError("trace record " + std::to_string(record) + ": bad hex " +
                        what + " '" + field + "'");
    return value;
}

}  // namespace

void write_trace(std::ostream& out, std::span<const MemoryAccess> trace, TraceFormat fmt) {
    if (fmt == TraceFormat::Text) {
        std::ostringstream buf;
        buf << std::hex;
        for (const auto& a : trace)
            buf << kind_letter(a.kind) << ",0x" << a.vaddr << ",0x" << a.pc << '\n';
        out << buf.str();
        return;
    }
    out.write(kTraceMagic, 4);
    out.put(char(kTraceVersion));
    put_u64le(out, trace.size());
    for (const auto& a : trace) {
        out.put(char(a.kind));
        put_u64le(out, a.vaddr);
        put_u64le(out, a.pc);
    }
}

static std::vector<MemoryAccess> read_text_trace(std::istream& in) {
    std::vector<MemoryAccess> trace;
    std::string line;
    size_t record = 0;
    while (std::getline(in, line)) {
        ++record;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string kind_s, vaddr_s, pc_s;
        if (!std::getline(ls, kind_s, ',') || !std::getline(ls, vaddr_s, ',') ||
            !std::getline(ls, pc_s))
            throw DataError("trace record " + std::to_string(record) +
                            ": expected kind,vaddr,pc");
        MemoryAccess a;
        if (kind_s == "I")
            a.kind = AccessKind::InstrFetch;
        else if (kind_s == "L")
            a.kind = AccessKind::DataLoad;
        else if (kind_s == "S")
            a.kind = AccessKind::DataStore;
        else
            throw DataError("trace record " + std::to_string(record) +
                            ": unknown access kind '" + kind_s + "'");
        a.vaddr = parse_hex(vaddr_s, record, "vaddr");
        a.pc = parse_hex(pc_s, record, "pc");
        trace.push_back(a);
    }
    return trace;
}

static std::vector<MemoryAccess> read_binary_trace(std::istream& in) {
    char header[kTraceHeaderBytes];
    in.read(header, kTraceHeaderBytes);
    if (in.gcount() != std::streamsize(kTraceHeaderBytes))
        throw DataError("trace: truncated header at offset 0");
    if (std::memcmp(header, kTraceMagic, 4) != 0)
        throw DataError("trace: bad magic at offset 0");
    if (uint8_t(header[4]) != kTraceVersion)
        throw DataError("trace: unsupported version " + std::to_string(header[4]) +
                        " at offset 4");
    uint64_t count = get_u64le(header + 5);

    std::vector<MemoryAccess> trace;
    trace.reserve(count);
    char rec[kTraceRecordBytes];
    for (uint64_t i = 0; i < count; ++i) {
        size_t offset = kTraceHeaderBytes + i * kTraceRecordBytes;
        in.read(rec, kTraceRecordBytes);
        if (in.gcount() != std::streamsize(kTraceRecordBytes))
            throw DataError("trace: truncated record at offset " + std::to_string(offset));
        uint8_t kind = uint8_t(rec[0]);
        if (kind > 2)
            throw DataError("trace: invalid kind byte " + std::to_string(kind) +
                            " at offset " + std::to_string(offset));
        MemoryAccess a;
        a.kind = AccessKind(kind);
        a.vaddr = get_u64le(rec + 1);
        a.pc = get_u64le(rec + 9);
        trace.push_back(a);
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw DataError("trace: trailing bytes after " + std::to_string(count) + " records");
    return trace;
}

std::vector<MemoryAccess> read_trace(std::istream& in, TraceFormat fmt) {
    return fmt == TraceFormat::Text ? read_text_trace(in) : read_binary_trace(in);
}

void write_trace_file(const std::string& path, std::span<const MemoryAccess> trace,
                      TraceFormat fmt) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write trace file: " + path);
    write_trace(out, trace, fmt);
    if (!out) throw DataError("I/O error while writing trace: " + path);
}

std::vector<MemoryAccess> read_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open trace file: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    in.clear();
    in.seekg(0);
    bool binary = std::memcmp(magic, kTraceMagic, 4) == 0;
    return read_trace(in, binary ? TraceFormat::Binary : TraceFormat::Text);
}

const char* to_string(Pattern p) {
    switch (p) {
    case Pattern::HotLoop: return "hot_loop";
    case Pattern::Scan: return "scan";
    case Pattern::Thrash: return "thrash";
    case Pattern::MixedTemperature: return "mixed_temperature";
    }
    return "?";
}

Pattern pattern_from_name(const std::string& name) {
    for (Pattern p : {Pattern::HotLoop, Pattern::Scan, Pattern::Thrash,
                      Pattern::MixedTemperature})
        if (name == to_string(p)) return p;
    throw ConfigError("unknown pattern '" + name +
                      "' (valid: hot_loop, scan, thrash, mixed_temperature)");
}

std::string PatternSpec::to_json() const {
    nlohmann::json j;
    j["pattern"] = std::string(trrip::to_string(pattern));
    j["hot_lines"] = hot_lines;
    j["warm_lines"] = warm_lines;
    j["cold_lines"] = cold_lines;
    j["data_lines"] = data_lines;
    j["iterations"] = iterations;
    j["target_reuse_distance"] = target_reuse_distance;
    j["hot_rotate"] = hot_rotate;
    j["sets_covered"] = sets_covered;
    j["set_modulus"] = set_modulus;
    j["line_size"] = line_size;
    j["page_size"] = page_size;
    j["seed"] = seed;
    return j.dump(2);
}

PatternSpec PatternSpec::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("pattern spec JSON parse error: ") + e.what());
    }
    PatternSpec s;
    if (j.contains("pattern")) s.pattern = pattern_from_name(j["pattern"].get<std::string>());
    auto get = [&](const char* key, uint64_t& field) {
        if (j.contains(key)) field = j[key].get<uint64_t>();
    };
    get("hot_lines", s.hot_lines);
    get("warm_lines", s.warm_lines);
    get("cold_lines", s.cold_lines);
    get("data_lines", s.data_lines);
    get("iterations", s.iterations);
    get("target_reuse_distance", s.target_reuse_distance);
    get("hot_rotate", s.hot_rotate);
    get("sets_covered", s.sets_covered);
    get("set_modulus", s.set_modulus);
    get("line_size", s.line_size);
    get("page_size", s.page_size);
    get("seed", s.seed);
    s.validate();
    return s;
}

void PatternSpec::validate() const {
    if (!is_pow2(line_size) || !is_pow2(page_size) || !is_pow2(set_modulus))
        throw ConfigError("pattern spec: line_size, page_size, set_modulus must be powers of two");
    if (iterations == 0) throw ConfigError("pattern spec: iterations must be positive");
    if (sets_covered == 0 || sets_covered > set_modulus)
        throw ConfigError("pattern spec: sets_covered must be in [1, set_modulus]");
    switch (pattern) {
    case Pattern::HotLoop:
        if (hot_lines == 0) throw ConfigError("hot_loop: hot_lines must be positive");
        break;
    case Pattern::Scan:
        if (hot_lines == 0 || cold_lines == 0)
            throw ConfigError("scan: needs resident hot_lines and cold_lines to sweep");
        break;
    case Pattern::Thrash:
        if (cold_lines == 0) throw ConfigError("thrash: cold_lines working set required");
        break;
    case Pattern::MixedTemperature: {
        if (hot_lines == 0) throw ConfigError("mixed_temperature: hot_lines must be positive");
        if (target_reuse_distance + 1 < hot_lines)
            throw ConfigError("mixed_temperature: target_reuse_distance below hot working set");
        uint64_t slots = target_reuse_distance - (hot_lines - 1);
        uint64_t pools = (cold_lines > 0) + (data_lines > 0) + (warm_lines > 0);
        if (slots > 0 && pools == 0)
            throw ConfigError("mixed_temperature: interferer slots but all pools empty");
        if (slots > 0) {
            // Every slot pick within one sweep must be a distinct line or the
            // measured distance falls short of the target.
            uint64_t per_class = (slots + pools - 1) / pools;
            if ((cold_lines > 0 && cold_lines < per_class) ||
                (data_lines > 0 && data_lines < per_class) ||
                (warm_lines > 0 && warm_lines < per_class))
                throw ConfigError("mixed_temperature: interferer pool smaller than per-cycle need");
        }
        break;
    }
    }
}

namespace {

// Region bases keep the temperature classes on disjoint pages.
constexpr uint64_t kHotBase = 0x10000000;
constexpr uint64_t kWarmBase = 0x20000000;
constexpr uint64_t kColdBase = 0x30000000;
constexpr uint64_t kDataBase = 0x40000000;

struct Gen {
    const PatternSpec& spec;
    Workload out;
    uint64_t last_instr_vaddr = 0;

    explicit Gen(const PatternSpec& s) : spec(s) { out.map.page_size = s.page_size; }

    // k-th line of a class for one set group: congruent to `group` modulo
    // set_modulus so the whole group lands in one L2 set.
    uint64_t class_line(uint64_t base, uint64_t group, uint64_t k) const {
        return base / spec.line_size + group + k * spec.set_modulus;
    }

    void mark_page(uint64_t vaddr, Temperature t) {
        if (t == Temperature::None) return;
        out.map.pages[vaddr / spec.page_size] = t;
    }

    void fetch(uint64_t line, Temperature t) {
        uint64_t vaddr = line * spec.line_size;
        out.trace.push_back({AccessKind::InstrFetch, vaddr, vaddr});
        mark_page(vaddr, t);
        last_instr_vaddr = vaddr;
    }

    void data(uint64_t line, uint64_t cursor) {
        uint64_t vaddr = line * spec.line_size;
        AccessKind kind = (cursor % 2 == 0) ? AccessKind::DataLoad : AccessKind::DataStore;
        out.trace.push_back({kind, vaddr, last_instr_vaddr});
    }

    void finish_blocks(uint64_t base, uint64_t group_count, uint64_t pool,
                       const char* tag, std::vector<uint64_t>& counts) {
        size_t i = 0;
        for (uint64_t g = 0; g < group_count; ++g) {
            for (uint64_t k = 0; k < pool; ++k, ++i) {
                if (counts[i] == 0) continue;
                AddressedBlock b;
                b.id = std::string(tag) + "_g" + std::to_string(g) + "_" + std::to_string(k);
                b.start_vaddr = class_line(base, g, k) * spec.line_size;
                b.size_bytes = spec.line_size;
                b.count = counts[i];
                out.blocks.push_back(std::move(b));
            }
        }
    }
};

Workload gen_mixed(const PatternSpec& spec) {
    Gen gen(spec);
    uint64_t hot = spec.hot_lines;
    uint64_t slots = spec.target_reuse_distance - (hot - 1);

    // Slot class rotation over the non-empty pools.
    std::vector<Temperature> slot_classes;
    {
        std::vector<Temperature> avail;
        if (spec.cold_lines > 0) avail.push_back(Temperature::Cold);
        if (spec.data_lines > 0) avail.push_back(Temperature::None);  // data
        if (spec.warm_lines > 0) avail.push_back(Temperature::Warm);
        for (uint64_t k = 0; k < slots && !avail.empty(); ++k)
            slot_classes.push_back(avail[k % avail.size()]);
    }

    uint64_t groups = spec.sets_covered;
    std::vector<uint64_t> hot_counts(groups * hot, 0);
    std::vector<uint64_t> cold_counts(groups * std::max<uint64_t>(spec.cold_lines, 1), 0);
    std::vector<uint64_t> warm_counts(groups * std::max<uint64_t>(spec.warm_lines, 1), 0);
    std::vector<uint64_t> ccur(groups, 0), wcur(groups, 0), dcur(groups, 0);

    for (uint64_t cyc = 0; cyc < spec.iterations; ++cyc) {
        for (uint64_t g = 0; g < groups; ++g) {
            uint64_t emitted_slots = 0;
            for (uint64_t i = 0; i < hot; ++i) {
                uint64_t h = (i + cyc * spec.hot_rotate) % hot;
                gen.fetch(gen.class_line(kHotBase, g, h), Temperature::Hot);
                ++hot_counts[g * hot + h];
                // Spread the interferer slots evenly across the sweep.
                uint64_t want = slots * (i + 1) / hot;
                while (emitted_slots < want) {
                    Temperature cls = slot_classes[emitted_slots];
                    ++emitted_slots;
                    if (cls == Temperature::Cold) {
                        uint64_t k = ccur[g]++ % spec.cold_lines;
                        gen.fetch(gen.class_line(kColdBase, g, k), Temperature::Cold);
                        ++cold_counts[g * spec.cold_lines + k];
                    } else if (cls == Temperature::Warm) {
                        uint64_t k = wcur[g]++ % spec.warm_lines;
                        gen.fetch(gen.class_line(kWarmBase, g, k), Temperature::Warm);
                        ++warm_counts[g * spec.warm_lines + k];
                    } else {
                        uint64_t cur = dcur[g]++;
                        gen.data(gen.class_line(kDataBase, g, cur % spec.data_lines), cur);
                    }
                }
            }
        }
    }

    gen.finish_blocks(kHotBase, groups, hot, "hot", hot_counts);
    gen.finish_blocks(kWarmBase, groups, spec.warm_lines, "warm", warm_counts);
    gen.finish_blocks(kColdBase, groups, spec.cold_lines, "cold", cold_counts);
    return std::move(gen.out);
}

Workload gen_scan(const PatternSpec& spec) {
    Gen gen(spec);
    uint64_t groups = spec.sets_covered;
    std::vector<uint64_t> hot_counts(groups * spec.hot_lines, 0);
    std::vector<uint64_t> cold_counts(groups * spec.cold_lines, 0);
    std::vector<uint64_t> scur(groups, 0);

    auto resident_sweep = [&](uint64_t g) {
        for (uint64_t k = 0; k < spec.hot_lines; ++k) {
            gen.fetch(gen.class_line(kHotBase, g, k), Temperature::Hot);
            ++hot_counts[g * spec.hot_lines + k];
        }
    };

    // One warm-up sweep establishes the resident loop before scans begin.
    for (uint64_t g = 0; g < groups; ++g) resident_sweep(g);
    for (uint64_t it = 0; it < spec.iterations; ++it) {
        for (uint64_t g = 0; g < groups; ++g) {
            resident_sweep(g);
            uint64_t want = spec.cold_lines * (it + 1) / spec.iterations;
            while (scur[g] < want) {
                uint64_t k = scur[g]++;
                gen.fetch(gen.class_line(kColdBase, g, k), Temperature::Cold);
                ++cold_counts[g * spec.cold_lines + k];
            }
        }
    }
    gen.finish_blocks(kHotBase, groups, spec.hot_lines, "hot", hot_counts);
    gen.finish_blocks(kColdBase, groups, spec.cold_lines, "cold", cold_counts);
    return std::move(gen.out);
}

Workload gen_thrash(const PatternSpec& spec) {
    Gen gen(spec);
    uint64_t groups = spec.sets_covered;
    std::vector<uint64_t> cold_counts(groups * spec.cold_lines, 0);
    for (uint64_t cyc = 0; cyc < spec.iterations; ++cyc) {
        for (uint64_t g = 0; g < groups; ++g) {
            for (uint64_t k = 0; k < spec.cold_lines; ++k) {
                gen.fetch(gen.class_line(kColdBase, g, k), Temperature::Cold);
                ++cold_counts[g * spec.cold_lines + k];
            }
        }
    }
    gen.finish_blocks(kColdBase, groups, spec.cold_lines, "cold", cold_counts);
    return std::move(gen.out);
}

Workload gen_hot_loop(const PatternSpec& spec) {
    Gen gen(spec);
    uint64_t groups = spec.sets_covered;
    std::vector<uint64_t> hot_counts(groups * spec.hot_lines, 0);
    std::vector<uint64_t> dcur(groups, 0);
    for (uint64_t it = 0; it < spec.iterations; ++it) {
        for (uint64_t g = 0; g < groups; ++g) {
            for (uint64_t k = 0; k < spec.hot_lines; ++k) {
                gen.fetch(gen.class_line(kHotBase, g, k), Temperature::Hot);
                ++hot_counts[g * spec.hot_lines + k];
            }
            if (spec.data_lines > 0) {
                uint64_t cur = dcur[g]++;
                gen.data(gen.class_line(kDataBase, g, cur % spec.data_lines), cur);
            }
        }
    }
    gen.finish_blocks(kHotBase, groups, spec.hot_lines, "hot", hot_counts);
    return std::move(gen.out);
}

}  // namespace

Workload generate(const PatternSpec& spec) {
    spec.validate();
    switch (spec.pattern) {
    case Pattern::HotLoop: return gen_hot_loop(spec);
    case Pattern::Scan: return gen_scan(spec);
    case Pattern::Thrash: return gen_thrash(spec);
    case Pattern::MixedTemperature: return gen_mixed(spec);
    }
    throw ConfigError("unknown pattern");
}

std::vector<ProfiledBlock> to_profile(const std::vector<AddressedBlock>& blocks) {
    std::vector<ProfiledBlock> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) out.push_back({b.id, b.size_bytes, b.count});
    return out;
}

std::string blocks_to_json(const std::vector<AddressedBlock>& blocks) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : blocks) {
        arr.push_back({{"id", b.id},
                       {"start", b.start_vaddr},
                       {"size", b.size_bytes},
                       {"count", b.count}});
    }
    return arr.dump(2);
}

std::vector<AddressedBlock> blocks_from_json(const std::string& text) {
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("blocks JSON parse error: ") + e.what());
    }
    std::vector<AddressedBlock> out;
    for (const auto& j : arr) {
        AddressedBlock b;
        b.id = j.at("id").get<std::string>();
        b.start_vaddr = j.at("start").get<uint64_t>();
        b.size_bytes = j.at("size").get<uint64_t>();
        b.count = j.at("count").get<uint64_t>();
        out.push_back(std::move(b));
    }
    return out;
}

TemperatureMap derive_block_map(const std::vector<AddressedBlock>& blocks,
                                const ThresholdParams& params, uint64_t page_size) {
    auto temps = classify(to_profile(blocks), params);
    TemperatureMap map;
    map.page_size = page_size;
    std::map<uint64_t, bool> conflicted;
    for (const auto& b : blocks) {
        Temperature t = temps.at(b.id);
        if (t == Temperature::None || b.size_bytes == 0) continue;
        uint64_t first = b.start_vaddr / page_size;
        uint64_t last = (b.start_vaddr + b.size_bytes - 1) / page_size;
        for (uint64_t p = first; p <= last; ++p) {
            auto it = map.pages.find(p);
            if (it == map.pages.end())
                map.pages[p] = t;
            else if (it->second != t)
                conflicted[p] = true;
        }
    }
    for (const auto& [page, _] : conflicted) map.pages.erase(page);
    return map;
}

}  // namespace trrip

#include "trrip/temperature.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace trrip {

void ThresholdParams::validate() const {
    if (!(percentile_hot > 0.0 && percentile_hot <= 1.0))
        throw ConfigError("percentile_hot must be in (0, 1]");
    if (!(percentile_cold > 0.0 && percentile_cold <= 1.0))
        throw ConfigError("percentile_cold must be in (0, 1]");
    if (percentile_cold < percentile_hot)
        throw ConfigError("percentile_cold must be >= percentile_hot");
}

uint64_t hot_count_threshold(const std::vector<ProfiledBlock>& blocks, double percentile) {
    if (!(percentile > 0.0 && percentile <= 1.0))
        throw ConfigError("percentile must be in (0, 1]");
    std::vector<uint64_t> counts;
    counts.reserve(blocks.size());
    unsigned __int128 total = 0;
    for (const auto& b : blocks) {
        counts.push_back(b.count);
        total += b.count;
    }
    if (total == 0)
        throw DataError("degenerate profile: all block counts are zero");
    std::sort(counts.begin(), counts.end(), std::greater<>());

    // C_threshold = ceil(C_total * percentile), kept integral.
    long double scaled = (long double)total * (long double)percentile;
    unsigned __int128 threshold = (unsigned __int128)ceill(scaled);
    if (threshold > total) threshold = total;
    if (threshold == 0) threshold = 1;

    unsigned __int128 cum = 0;
    for (uint64_t c : counts) {
        cum += c;
        if (cum >= threshold) return c;
    }
    // Unreachable: the full sum equals total >= threshold.
    return counts.back();
}

std::map<std::string, Temperature> classify(const std::vector<ProfiledBlock>& blocks,
                                            const ThresholdParams& params) {
    params.validate();
    uint64_t cn_hot = hot_count_threshold(blocks, params.percentile_hot);
    uint64_t cn_cold = hot_count_threshold(blocks, params.percentile_cold);

    std::map<std::string, Temperature> out;
    for (const auto& b : blocks) {
        Temperature t;
        if (b.count >= cn_hot)
            t = Temperature::Hot;
        else if (b.count == 0 || b.count < cn_cold)
            t = Temperature::Cold;
        else
            t = Temperature::Warm;
        out[b.id] = t;
    }
    return out;
}

const Section* SectionLayout::find(Temperature t) const {
    for (const auto& s : sections)
        if (s.temperature == t) return &s;
    return nullptr;
}

static uint64_t align_up(uint64_t v, uint64_t a) {
    return a == 0 ? v : (v + a - 1) / a * a;
}

SectionLayout layout_sections(const std::vector<ProfiledBlock>& blocks,
                              const std::map<std::string, Temperature>& temps,
                              uint64_t base_vaddr, uint64_t alignment) {
    SectionLayout layout;
    layout.base_vaddr = base_vaddr;

    uint64_t cursor = base_vaddr;
    for (Temperature t : {Temperature::Hot, Temperature::Warm, Temperature::Cold}) {
        std::vector<const ProfiledBlock*> members;
        for (const auto& b : blocks) {
            auto it = temps.find(b.id);
            if (it == temps.end())
                throw ConfigError("layout_sections: block '" + b.id + "' has no temperature");
            if (it->second == t) members.push_back(&b);
        }
        if (members.empty()) continue;
        std::stable_sort(members.begin(), members.end(),
                         [](const ProfiledBlock* a, const ProfiledBlock* b) {
                             return a->count > b->count;
                         });
        Section sec;
        sec.temperature = t;
        sec.start_vaddr = align_up(cursor, alignment);
        for (const auto* m : members) {
            sec.block_ids.push_back(m->id);
            sec.size_bytes += m->size_bytes;
        }
        cursor = sec.start_vaddr + sec.size_bytes;
        layout.sections.push_back(std::move(sec));
    }
    return layout;
}

PageMapResult build_page_map(const SectionLayout& layout, uint64_t page_size,
                             OverlapMode mode) {
    if (!is_pow2(page_size))
        throw ConfigError("page size must be a power of two");

    PageMapResult result;
    result.map.page_size = page_size;
    result.layout = layout;

    if (mode == OverlapMode::Pad) {
        // Push every section start to a page boundary so no page straddles
        // two temperatures.
        uint64_t cursor = 0;
        for (auto& sec : result.layout.sections) {
            uint64_t start = std::max(sec.start_vaddr, cursor);
            start = align_up(start, page_size);
            sec.start_vaddr = start;
            cursor = sec.end_vaddr();
        }
    }

    // One pass per section; pages touched by two temperatures are resolved
    // by the overlap mode (pad never produces them).
    std::map<uint64_t, Temperature> tentative;
    std::map<uint64_t, bool> conflicted;
    for (const auto& sec : result.layout.sections) {
        if (sec.size_bytes == 0) continue;
        uint64_t first = sec.start_vaddr / page_size;
        uint64_t last = (sec.end_vaddr() - 1) / page_size;
        for (uint64_t p = first; p <= last; ++p) {
            auto it = tentative.find(p);
            if (it == tentative.end()) {
                tentative[p] = sec.temperature;
            } else if (it->second != sec.temperature) {
                conflicted[p] = true;
            }
        }
    }
    for (const auto& [page, temp] : tentative) {
        if (conflicted.count(page)) continue;  // unmark mode: leave as None
        result.map.pages[page] = temp;
    }
    return result;
}

PageUtilization page_utilization(const SectionLayout& layout, uint64_t page_size) {
    PageUtilization u;
    if (const Section* hot = layout.find(Temperature::Hot))
        u.hot_pages = (hot->size_bytes + page_size - 1) / page_size;
    if (const Section* warm = layout.find(Temperature::Warm))
        u.warm_pages = (warm->size_bytes + page_size - 1) / page_size;
    return u;
}

std::vector<ProfiledBlock> read_profile(std::istream& in) {
    std::vector<ProfiledBlock> blocks;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ProfiledBlock b;
        std::string field;
        if (!std::getline(ls, b.id, ','))
            throw DataError("profile line " + std::to_string(lineno) + ": missing block id");
        try {
            if (!std::getline(ls, field, ','))
                throw std::invalid_argument("missing size");
            b.size_bytes = std::stoull(field);
            if (!std::getline(ls, field))
                throw std::invalid_argument("missing count");
            b.count = std::stoull(field);
        } catch (const std::exception&) {
            throw DataError("profile line " + std::to_string(lineno) + ": malformed record");
        }
        if (b.size_bytes == 0)
            throw DataError("profile line " + std::to_string(lineno) + ": zero block size");
        blocks.push_back(std::move(b));
    }
    return blocks;
}

std::vector<ProfiledBlock> read_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open profile file: " + path);
    return read_profile(in);
}

static void ensure_parent_dir(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

void write_profile_file(const std::string& path, const std::vector<ProfiledBlock>& blocks) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write profile file: " + path);
    for (const auto& b : blocks)
        out << b.id << ',' << b.size_bytes << ',' << b.count << '\n';
}

static Temperature temp_from_name(const std::string& name) {
    if (name == "hot") return Temperature::Hot;
    if (name == "warm") return Temperature::Warm;
    if (name == "cold") return Temperature::Cold;
    if (name == "none") return Temperature::None;
    throw DataError("unknown temperature name: " + name);
}

std::string map_to_json(const TemperatureMap& map) {
    nlohmann::json j;
    j["page_size"] = map.page_size;
    nlohmann::json pages = nlohmann::json::object();
    for (const auto& [page, temp] : map.pages)
        pages[std::to_string(page)] = to_string(temp);
    j["pages"] = pages;
    return j.dump(2);
}

TemperatureMap map_from_json(const std::string& text) {
    TemperatureMap map;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("temperature map JSON parse error: ") + e.what());
    }
    if (!j.contains("page_size") || !j.contains("pages"))
        throw DataError("temperature map JSON: missing page_size or pages");
    map.page_size = j["page_size"].get<uint64_t>();
    if (!is_pow2(map.page_size))
        throw DataError("temperature map JSON: page_size must be a power of two");
    for (const auto& [key, val] : j["pages"].items())
        map.pages[std::stoull(key)] = temp_from_name(val.get<std::string>());
    return map;
}

static void put_u64le(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

static uint64_t get_u64le(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(p[i]) << (8 * i);
    return v;
}

std::vector<uint8_t> map_to_binary(const TemperatureMap& map) {
    std::vector<uint8_t> out;
    put_u64le(out, map.page_size);
    for (const auto& [page, temp] : map.pages) {
        put_u64le(out, page);
        out.push_back(uint8_t(temp));
    }
    return out;
}

TemperatureMap map_from_binary(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 8)
        throw DataError("temperature map binary: truncated header");
    TemperatureMap map;
    map.page_size = get_u64le(bytes.data());
    if (!is_pow2(map.page_size))
        throw DataError("temperature map binary: page_size must be a power of two");
    size_t off = 8;
    while (off < bytes.size()) {
        if (bytes.size() - off < 9)
            throw DataError("temperature map binary: truncated record at offset " +
                            std::to_string(off));
        uint64_t page = get_u64le(bytes.data() + off);
        uint8_t code = bytes[off + 8];
        if (code > 3)
            throw DataError("temperature map binary: invalid temperature code at offset " +
                            std::to_string(off + 8));
        map.pages[page] = Temperature(code);
        off += 9;
    }
    return map;
}

void write_map_file(const std::string& path, const TemperatureMap& map, bool binary) {
    ensure_parent_dir(path);
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw ConfigError("cannot write temperature map: " + path);
    if (binary) {
        auto bytes = map_to_binary(map);
        out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    } else {
        out << map_to_json(map) << '\n';
    }
}

TemperatureMap read_map_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open temperature map: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    // JSON maps start with '{'; the binary header never does (page_size is
    // a small power of two).
    if (!bytes.empty() && bytes[0] == '{')
        return map_from_json(std::string(bytes.begin(), bytes.end()));
    return map_from_binary(bytes);
}

}  // namespace trrip

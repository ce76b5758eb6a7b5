#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "trrip/core.hpp"

namespace trrip {

struct ProfiledBlock {
    std::string id;
    uint64_t size_bytes = 0;
    uint64_t count = 0;  // execution count from the profile
};

struct ThresholdParams {
    double percentile_hot = 0.99;
    double percentile_cold = 0.9999;

    void validate() const;
};

// Count threshold C_n: counts are sorted descending and summed until the
// cumulative mass first reaches ceil(total * percentile); the smallest count
// inside that covering prefix is returned. Blocks with count >= C_n are
// inside the percentile mass.
uint64_t hot_count_threshold(const std::vector<ProfiledBlock>& blocks, double percentile);

// hot: count >= C_n(percentile_hot); cold: count == 0 or count < C_n(percentile_cold);
// warm otherwise. Hot wins if the thresholds collide.
std::map<std::string, Temperature> classify(const std::vector<ProfiledBlock>& blocks,
                                            const ThresholdParams& params);

struct Section {
    Temperature temperature = Temperature::None;
    uint64_t start_vaddr = 0;
    uint64_t size_bytes = 0;
    std::vector<std::string> block_ids;
    uint64_t end_vaddr() const { return start_vaddr + size_bytes; }
};

struct SectionLayout {
    uint64_t base_vaddr = 0;
    std::vector<Section> sections;  // ordered hot, warm, cold; empty ones omitted

    const Section* find(Temperature t) const;
};

// Packs classified blocks into contiguous hot/warm/cold sections. Blocks
// within a section are ordered by descending count (profile order on ties).
SectionLayout layout_sections(const std::vector<ProfiledBlock>& blocks,
                              const std::map<std::string, Temperature>& temps,
                              uint64_t base_vaddr, uint64_t alignment);

enum class OverlapMode { Pad, Unmark };

struct TemperatureMap {
    uint64_t page_size = 4096;
    std::map<uint64_t, Temperature> pages;  // page number -> temperature

    Temperature lookup(uint64_t vaddr) const {
        auto it = pages.find(vaddr / page_size);
        return it == pages.end() ? Temperature::None : it->second;
    }
    bool empty() const { return pages.empty(); }
};

struct PageMapResult {
    TemperatureMap map;
    SectionLayout layout;  // pad mode moves section starts to page boundaries
};

PageMapResult build_page_map(const SectionLayout& layout, uint64_t page_size,
                             OverlapMode mode);

struct PageUtilization {
    uint64_t hot_pages = 0;
    uint64_t warm_pages = 0;
};

PageUtilization page_utilization(const SectionLayout& layout, uint64_t page_size);

// Profile file: one `block_id,size_bytes,count` record per line.
std::vector<ProfiledBlock> read_profile(std::istream& in);
std::vector<ProfiledBlock> read_profile_file(const std::string& path);
void write_profile_file(const std::string& path, const std::vector<ProfiledBlock>& blocks);

// JSON form: { "page_size": N, "pages": { "<page>": "hot"|"warm"|"cold" } }
std::string map_to_json(const TemperatureMap& map);
TemperatureMap map_from_json(const std::string& text);

// Binary form: u64 LE page_size, then (u64 LE page, u8 temperature code)*.
std::vector<uint8_t> map_to_binary(const TemperatureMap& map);
TemperatureMap map_from_binary(const std::vector<uint8_t>& bytes);

void write_map_file(const std::string& path, const TemperatureMap& map, bool binary = false);
TemperatureMap read_map_file(const std::string& path);

}  // namespace trrip

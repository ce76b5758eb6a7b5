#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace trrip {

// Errors that map to CLI exit codes: ConfigError -> 2, DataError -> 3.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class AccessKind : uint8_t { InstrFetch = 0, DataLoad = 1, DataStore = 2 };

// Wire encoding is fixed: None=0, Hot=1, Warm=2, Cold=3 (2 bits).
enum class Temperature : uint8_t { None = 0, Hot = 1, Warm = 2, Cold = 3 };

enum class LineClass : uint8_t { Instruction = 0, Data = 1 };

inline const char* to_string(Temperature t) {
    switch (t) {
    case Temperature::None: return "none";
    case Temperature::Hot: return "hot";
    case Temperature::Warm: return "warm";
    case Temperature::Cold: return "cold";
    }
    return "none";
}

struct MemoryAccess {
    AccessKind kind = AccessKind::InstrFetch;
    uint64_t vaddr = 0;
    uint64_t pc = 0;  // equals vaddr for instruction fetches

    bool is_instr() const { return kind == AccessKind::InstrFetch; }
    LineClass line_class() const {
        return is_instr() ? LineClass::Instruction : LineClass::Data;
    }
    bool operator==(const MemoryAccess&) const = default;
};

inline bool is_pow2(uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline uint64_t line_of(uint64_t vaddr, uint64_t line_size) {
    return vaddr / line_size;
}

inline uint64_t set_index(uint64_t line_number, uint64_t set_count) {
    return line_number & (set_count - 1);
}

struct CacheGeometry {
    uint64_t capacity_bytes = 0;
    uint32_t associativity = 0;
    uint32_t line_size_bytes = 64;

    uint64_t set_count() const {
        return capacity_bytes / (uint64_t(associativity) * line_size_bytes);
    }
    void validate() const {
        if (capacity_bytes == 0 || associativity == 0)
            throw ConfigError("cache geometry: capacity and associativity must be positive");
        if (!is_pow2(line_size_bytes))
            throw ConfigError("cache geometry: line size must be a power of two");
        uint64_t span = uint64_t(associativity) * line_size_bytes;
        if (capacity_bytes % span != 0)
            throw ConfigError("cache geometry: capacity not divisible by assoc*line_size");
        if (!is_pow2(set_count()))
            throw ConfigError("cache geometry: set count must be a power of two");
    }
};

// Identity of a line as it travels with a fill request. Temperature here is
// the request-side annotation; set metadata never retains it.
struct LineId {
    uint64_t line_number = 0;
    LineClass kind_class = LineClass::Instruction;
    Temperature temperature = Temperature::None;
};

struct ClassCounters {
    uint64_t accesses = 0;
    uint64_t hits = 0;
    uint64_t misses = 0;

    ClassCounters& operator+=(const ClassCounters& o) {
        accesses += o.accesses;
        hits += o.hits;
        misses += o.misses;
        return *this;
    }
};

inline double mpki(uint64_t misses, uint64_t retired) {
    if (retired == 0)
        throw DataError("mpki undefined: zero retired instructions");
    return double(misses) * 1000.0 / double(retired);
}

// splitmix64: the deterministic stream behind BRRIP's bimodal insertion and
// the trace generator.
struct SplitMix64 {
    uint64_t state = 0;
    explicit SplitMix64(uint64_t seed = 0) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // uniform in [0, n)
    uint64_t next_below(uint64_t n) { return next() % n; }
};

inline uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

}  // namespace trrip

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "support/oracles.hpp"
#include "trrip/analysis.hpp"
#include "trrip/hierarchy.hpp"
#include "trrip/trace.hpp"

using namespace trrip;

TEST_CASE("text format") {
    std::istringstream in("I,0x4000,0x4000\nL,0x100,0x4000\nS,0x200,0x4004\n");
    auto trace = read_trace(in, TraceFormat::Text);
    REQUIRE(trace.size() == 3);
    CHECK(trace[0].kind == AccessKind::InstrFetch);
    CHECK(trace[0].vaddr == 0x4000);
    CHECK(trace[1].kind == AccessKind::DataLoad);
    CHECK(trace[1].vaddr == 0x100);
    CHECK(trace[1].pc == 0x4000);
    CHECK(trace[2].kind == AccessKind::DataStore);

    std::istringstream bad_kind("X,0x1,0x1\n");
    CHECK_THROWS_AS(read_trace(bad_kind, TraceFormat::Text), DataError);
    std::istringstream bad_hex("I,zz,0x1\n");
    CHECK_THROWS_AS(read_trace(bad_hex, TraceFormat::Text), DataError);
    std::istringstream missing("I,0x1\n");
    CHECK_THROWS_AS(read_trace(missing, TraceFormat::Text), DataError);
}

TEST_CASE("binary format layout is pinned") {
    std::vector<MemoryAccess> empty;
    std::ostringstream out;
    write_trace(out, empty, TraceFormat::Binary);
    CHECK(out.str().size() == kTraceHeaderBytes);

    std::vector<MemoryAccess> three = {{AccessKind::InstrFetch, 1, 1},
                                       {AccessKind::DataLoad, 2, 1},
                                       {AccessKind::DataStore, 3, 1}};
    std::ostringstream out3;
    write_trace(out3, three, TraceFormat::Binary);
    CHECK(out3.str().size() == kTraceHeaderBytes + 3 * kTraceRecordBytes);

    // one record: kind 1, vaddr 0x100, pc 0x4000
    std::vector<MemoryAccess> one = {{AccessKind::DataLoad, 0x100, 0x4000}};
    std::ostringstream outo;
    write_trace(outo, one, TraceFormat::Binary);
    std::string bytes = outo.str();
    CHECK(bytes.substr(0, 4) == "TRRP");
    CHECK(uint8_t(bytes[4]) == 1);              // version
    CHECK(uint8_t(bytes[5]) == 1);              // count LE
    CHECK(uint8_t(bytes[13]) == 1);             // kind = DataLoad
    CHECK(uint8_t(bytes[14]) == 0x00);
    CHECK(uint8_t(bytes[15]) == 0x01);          // vaddr LE second byte
    CHECK(uint8_t(bytes[23]) == 0x40);          // pc LE second byte

    std::istringstream in(bytes);
    auto back = read_trace(in, TraceFormat::Binary);
    REQUIRE(back.size() == 1);
    CHECK(back[0] == one[0]);
}

TEST_CASE("binary parse errors carry offsets") {
    auto parse = [](std::string s) {
        std::istringstream in(s);
        return read_trace(in, TraceFormat::Binary);
    };
    CHECK_THROWS_WITH_AS(parse("XXXX"), doctest::Contains("truncated header"), DataError);
    std::string bad_magic(13, '\0');
    CHECK_THROWS_WITH_AS(parse(bad_magic), doctest::Contains("bad magic"), DataError);

    std::vector<MemoryAccess> one = {{AccessKind::InstrFetch, 0, 0}};
    std::ostringstream out;
    write_trace(out, one, TraceFormat::Binary);
    std::string good = out.str();

    std::string bad_version = good;
    bad_version[4] = 2;
    CHECK_THROWS_WITH_AS(parse(bad_version), doctest::Contains("version"), DataError);

    std::string bad_kind = good;
    bad_kind[13] = 0x07;
    CHECK_THROWS_WITH_AS(parse(bad_kind), doctest::Contains("offset 13"), DataError);

    std::string truncated = good.substr(0, good.size() - 3);
    CHECK_THROWS_WITH_AS(parse(truncated), doctest::Contains("truncated record"), DataError);

    std::string trailing = good + "zz";
    CHECK_THROWS_WITH_AS(parse(trailing), doctest::Contains("trailing"), DataError);
}

TEST_CASE("round trips are byte-exact in both formats") {
    SplitMix64 rng(5);
    std::vector<MemoryAccess> trace;
    for (int i = 0; i < 1000; ++i) {
        MemoryAccess a;
        a.kind = AccessKind(rng.next_below(3));
        a.vaddr = rng.next();
        a.pc = rng.next();
        trace.push_back(a);
    }
    for (TraceFormat fmt : {TraceFormat::Binary, TraceFormat::Text}) {
        std::ostringstream out;
        write_trace(out, trace, fmt);
        std::istringstream in(out.str());
        auto back = read_trace(in, fmt);
        CHECK(back == trace);
        std::ostringstream out2;
        write_trace(out2, back, fmt);
        CHECK(out2.str() == out.str());
    }
}

TEST_CASE("pattern spec json round-trips and validates") {
    PatternSpec spec;
    spec.pattern = Pattern::MixedTemperature;
    spec.hot_lines = 8;
    spec.cold_lines = 4;
    spec.target_reuse_distance = 11;
    spec.iterations = 40;
    std::string j = spec.to_json();
    PatternSpec back = PatternSpec::from_json(j);
    CHECK(back.to_json() == j);

    PatternSpec bad = spec;
    bad.target_reuse_distance = 3;  // below hot working set
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    PatternSpec starved = spec;
    starved.cold_lines = 0;  // slots exist but no pools
    CHECK_THROWS_AS(starved.validate(), ConfigError);

    PatternSpec tiny_pool = spec;
    tiny_pool.cold_lines = 2;  // 4 slots/cycle from a 2-line pool
    CHECK_THROWS_AS(tiny_pool.validate(), ConfigError);
}

TEST_CASE("generator determinism") {
    PatternSpec spec;
    spec.pattern = Pattern::MixedTemperature;
    spec.hot_lines = 8;
    spec.cold_lines = 16;
    spec.data_lines = 16;
    spec.target_reuse_distance = 11;
    spec.iterations = 25;
    Workload a = generate(spec);
    Workload b = generate(spec);
    CHECK(a.trace == b.trace);
    CHECK(map_to_json(a.map) == map_to_json(b.map));
    CHECK(blocks_to_json(a.blocks) == blocks_to_json(b.blocks));
}

TEST_CASE("mixed temperature without rotation hits the target distance exactly") {
    PatternSpec spec;
    spec.pattern = Pattern::MixedTemperature;
    spec.hot_lines = 8;
    spec.cold_lines = 4;
    spec.target_reuse_distance = 11;
    spec.hot_rotate = 0;
    spec.iterations = 50;
    Workload w = generate(spec);

    // Feed the raw trace to the measurement path.
    std::vector<ReuseInput> stream;
    for (const auto& a : w.trace) {
        ReuseInput e;
        e.line = line_of(a.vaddr, 64);
        e.is_instr = a.is_instr();
        e.is_hot = a.is_instr() && w.map.lookup(a.vaddr) == Temperature::Hot;
        stream.push_back(e);
    }
    auto samples = reuse_distance_samples(stream, 2048, ReuseMode::Base);
    REQUIRE(samples.size() == 8 * 49);  // every hot line re-accessed each cycle
    for (uint64_t d : samples) CHECK(d == 11);
}

TEST_CASE("accepted specs always validate under the reuse-distance oracle") {
    SplitMix64 rng(99);
    for (int t = 0; t < 30; ++t) {
        PatternSpec spec;
        spec.pattern = Pattern::MixedTemperature;
        spec.hot_lines = 2 + rng.next_below(10);
        spec.target_reuse_distance = spec.hot_lines - 1 + rng.next_below(8);
        spec.cold_lines = 16 + rng.next_below(32);
        spec.data_lines = rng.next_below(2) ? 16 + rng.next_below(32) : 0;
        spec.warm_lines = rng.next_below(2) ? 16 : 0;
        spec.hot_rotate = 0;
        spec.iterations = 20;
        spec.validate();
        Workload w = generate(spec);

        std::vector<ReuseInput> stream;
        for (const auto& a : w.trace) {
            stream.push_back({line_of(a.vaddr, 64), a.is_instr(),
                              a.is_instr() && w.map.lookup(a.vaddr) == Temperature::Hot});
        }
        auto samples = reuse_distance_samples(stream, spec.set_modulus, ReuseMode::Base);
        REQUIRE(!samples.empty());
        for (uint64_t d : samples) REQUIRE(d == spec.target_reuse_distance);
    }
}

TEST_CASE("generated map and trace agree on temperature regions") {
    PatternSpec spec;
    spec.pattern = Pattern::MixedTemperature;
    spec.hot_lines = 6;
    spec.warm_lines = 4;
    spec.cold_lines = 8;
    spec.data_lines = 8;
    spec.target_reuse_distance = 12;
    spec.iterations = 20;
    spec.sets_covered = 2;
    Workload w = generate(spec);

    for (const auto& a : w.trace) {
        if (!a.is_instr()) {
            CHECK(a.vaddr >= 0x40000000);  // data region
            continue;
        }
        Temperature t = w.map.lookup(a.vaddr);
        if (a.vaddr >= 0x30000000)
            CHECK(t == Temperature::Cold);
        else if (a.vaddr >= 0x20000000)
            CHECK(t == Temperature::Warm);
        else
            CHECK(t == Temperature::Hot);
    }

    // Blocks cover every instruction line with its access count.
    std::map<uint64_t, uint64_t> line_counts;
    for (const auto& a : w.trace)
        if (a.is_instr()) ++line_counts[line_of(a.vaddr, 64)];
    uint64_t block_total = 0;
    for (const auto& b : w.blocks)
        if (b.start_vaddr < 0x40000000) block_total += b.count;
    uint64_t trace_total = 0;
    for (const auto& [line, c] : line_counts) trace_total += c;
    CHECK(block_total == trace_total);
}

TEST_CASE("scan trace: srrip resists the sweep, lru thrashes") {
    PatternSpec spec;
    spec.pattern = Pattern::Scan;
    spec.hot_lines = 2;    // residents per set group
    spec.cold_lines = 500;  // scan lines per set group: 1000 total
    spec.iterations = 167;
    spec.sets_covered = 2;
    spec.set_modulus = 2;
    Workload w = generate(spec);

    CacheGeometry geom{512, 4, 64};  // 2 sets x 4 ways
    SimResult lru = simulate(w.trace, w.map,
                             HierarchyConfig::single_level(geom, PolicyKind::Lru));
    SimResult srrip = simulate(w.trace, w.map,
                               HierarchyConfig::single_level(geom, PolicyKind::Srrip));
    CHECK(lru.l2.instr.misses > srrip.l2.instr.misses);
}

TEST_CASE("thrash trace: brrip retains part of the working set, srrip does not") {
    PatternSpec spec;
    spec.pattern = Pattern::Thrash;
    spec.cold_lines = 12;
    spec.iterations = 100;
    spec.set_modulus = 1;
    Workload w = generate(spec);

    CacheGeometry geom{512, 8, 64};  // 1 set x 8 ways
    SimResult srrip = simulate(w.trace, w.map,
                               HierarchyConfig::single_level(geom, PolicyKind::Srrip));
    SimResult brrip = simulate(w.trace, w.map,
                               HierarchyConfig::single_level(geom, PolicyKind::Brrip));
    CHECK(brrip.l2.instr.misses < srrip.l2.instr.misses);
}

TEST_CASE("hot loop converges to hits") {
    PatternSpec spec;
    spec.pattern = Pattern::HotLoop;
    spec.hot_lines = 4;
    spec.data_lines = 2;
    spec.iterations = 50;
    Workload w = generate(spec);
    SimResult r = simulate(w.trace, w.map, HierarchyConfig::defaults());
    CHECK(r.l1i.instr.hits > r.l1i.instr.misses * 10);
}

TEST_CASE("file round trip with format sniffing") {
    PatternSpec spec;
    spec.pattern = Pattern::HotLoop;
    spec.hot_lines = 3;
    spec.iterations = 5;
    Workload w = generate(spec);

    std::string dir = "trace_test_tmp";
    write_trace_file(dir + "/t.bin", w.trace, TraceFormat::Binary);
    write_trace_file(dir + "/t.txt", w.trace, TraceFormat::Text);
    CHECK(read_trace_file(dir + "/t.bin") == w.trace);
    CHECK(read_trace_file(dir + "/t.txt") == w.trace);
}

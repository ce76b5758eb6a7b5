#pragma once

// The canonical workloads behind the acceptance run: a hot-retention trace
// with reuse distance targeted at 11 in 8-way sets, a scan trace with a small
// resident loop, and a thrashing sweep.

#include "trrip/trace.hpp"

namespace canonical {

// 8 hot lines per set at target reuse distance 11 against streaming cold and
// data interference. The sweep start rotates by one each cycle so victim
// choice cannot phase-lock against the next sweep; measured distances sit in
// the 9-12 bin with mean 10.1. set_modulus 2048 keeps the workload inside a
// single set at every associativity of a 512kB L2.
inline trrip::PatternSpec hot_retention() {
    trrip::PatternSpec spec;
    spec.pattern = trrip::Pattern::MixedTemperature;
    spec.hot_lines = 8;
    spec.cold_lines = 256;
    spec.data_lines = 256;
    spec.target_reuse_distance = 11;
    spec.hot_rotate = 1;
    spec.iterations = 600;
    spec.sets_covered = 1;
    spec.set_modulus = 2048;
    return spec;
}

// Two resident lines per set against three fresh scan lines per iteration:
// SRRIP keeps the residents (at most two RRPV aging rounds between hits),
// LRU loses them every pass.
inline trrip::PatternSpec scan(uint64_t sets) {
    trrip::PatternSpec spec;
    spec.pattern = trrip::Pattern::Scan;
    spec.hot_lines = 2;
    spec.cold_lines = 90;  // per set group: 3 per iteration
    spec.iterations = 30;
    spec.sets_covered = sets;
    spec.set_modulus = sets;
    return spec;
}

// A 24-line working set cycling through 8-way sets.
inline trrip::PatternSpec thrash(uint64_t sets) {
    trrip::PatternSpec spec;
    spec.pattern = trrip::Pattern::Thrash;
    spec.cold_lines = 24;
    spec.iterations = 30;
    spec.sets_covered = sets;
    spec.set_modulus = sets;
    return spec;
}

}  // namespace canonical

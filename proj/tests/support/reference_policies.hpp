#pragma once

// Brute-force single-level cache models, written independently of the engine
// as flat per-access state machines. They re-derive every policy rule from
// scratch; only the external contracts are shared with the engine: the L2
// policy PRNG stream (seed mixing and one draw per bimodal insertion) and the
// leader-set placement formula.

#include <cstdint>
#include <deque>
#include <vector>

#include "trrip/core.hpp"
#include "trrip/policy.hpp"

namespace refmodel {

inline uint64_t mix(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

struct Rng {
    uint64_t s;
    uint64_t next() {
        uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

struct RefAccess {
    uint64_t line = 0;
    bool instr = true;
    trrip::Temperature temp = trrip::Temperature::None;
    uint64_t pc_line = 0;
};

class RefCache {
public:
    RefCache(trrip::PolicyKind kind, uint32_t sets, uint32_t ways, uint64_t engine_seed,
             trrip::ClipVariant clip_variant = trrip::ClipVariant::Duel,
             uint32_t priority_quota = 4)
        : kind_(kind), sets_(sets), ways_(ways), clip_variant_(clip_variant),
          quota_(priority_quota) {
        // The engine seeds its L2 policy stream as mix(seed ^ salt*(2+1)).
        rng_.s = mix(engine_seed ^ (0x9e3779b97f4a7c15ULL * 3));
        ways_state_.assign(sets, std::vector<Way>(ways));
        stacks_.assign(sets, {});
        shct_.assign(1u << 18, 1);
        psel_ = 512;
    }

    bool access(const RefAccess& a) {
        uint32_t set = uint32_t(a.line % sets_);
        auto& ws = ways_state_[set];

        for (uint32_t w = 0; w < ways_; ++w) {
            if (ws[w].valid && ws[w].line == a.line) {
                hit_update(set, w, a);
                return true;
            }
        }

        // Demand miss: leaders train the selector.
        if (kind_ == trrip::PolicyKind::Drrip ||
            (kind_ == trrip::PolicyKind::Clip && clip_variant_ == trrip::ClipVariant::Duel)) {
            int role = leader_role(set);
            if (role == 0 && psel_ < 1023) ++psel_;
            if (role == 1 && psel_ > 0) --psel_;
        }

        uint32_t w = ways_;
        for (uint32_t i = 0; i < ways_; ++i) {
            if (!ws[i].valid) {
                w = i;
                break;
            }
        }
        if (w == ways_) {
            w = pick_victim(set);
            if (kind_ == trrip::PolicyKind::Ship && ws[w].has_sig && !ws[w].reused) {
                uint8_t& c = shct_[ws[w].sig];
                if (c > 0) --c;
            }
            remove_from_stack(set, w);
        }
        fill(set, w, a);
        return false;
    }

private:
    struct Way {
        bool valid = false;
        uint64_t line = 0;
        int rrpv = 3;
        uint64_t sig = 0;
        bool has_sig = false;
        bool reused = false;
        bool prio = false;
    };

    // 0 = policy-A leader, 1 = policy-B leader, 2 = follower.
    int leader_role(uint32_t set) const {
        uint32_t pairs = std::min(32u, sets_ / 2);
        if (pairs == 0) return 2;
        uint32_t period = sets_ / pairs;
        if (set % period == 0) return 0;
        if (set % period == 1) return 1;
        return 2;
    }

    bool clip_b_active(uint32_t set) const {
        if (clip_variant_ == trrip::ClipVariant::A) return false;
        if (clip_variant_ == trrip::ClipVariant::B) return true;
        int role = leader_role(set);
        if (role == 0) return false;
        if (role == 1) return true;
        return psel_ >= 512;
    }

    void hit_update(uint32_t set, uint32_t w, const RefAccess& a) {
        auto& ws = ways_state_[set];
        switch (kind_) {
        case trrip::PolicyKind::Lru:
        case trrip::PolicyKind::Emissary:
            remove_from_stack(set, w);
            stacks_[set].push_back(w);
            return;
        case trrip::PolicyKind::Trrip2:
            if (a.temp == trrip::Temperature::Hot)
                ws[w].rrpv = 0;
            else if (a.temp == trrip::Temperature::Warm ||
                     a.temp == trrip::Temperature::Cold)
                ws[w].rrpv = std::max(ws[w].rrpv - 1, 0);
            else
                ws[w].rrpv = 0;
            return;
        case trrip::PolicyKind::Clip:
            if (clip_b_active(set) && !a.instr)
                ws[w].rrpv = std::max(ws[w].rrpv - 1, 1);
            else
                ws[w].rrpv = 0;
            return;
        case trrip::PolicyKind::Ship:
            ws[w].rrpv = 0;
            if (a.instr && ws[w].has_sig) {
                ws[w].reused = true;
                uint8_t& c = shct_[ws[w].sig];
                if (c < 3) ++c;
            }
            return;
        default:
            ws[w].rrpv = 0;
            return;
        }
    }

    uint32_t pick_victim(uint32_t set) {
        auto& ws = ways_state_[set];
        if (kind_ == trrip::PolicyKind::Lru) return stacks_[set].front();
        if (kind_ == trrip::PolicyKind::Emissary) {
            for (uint32_t w : stacks_[set])
                if (!ws[w].prio) return w;
            return stacks_[set].front();
        }
        for (;;) {
            for (uint32_t w = 0; w < ways_; ++w)
                if (ws[w].rrpv == 3) return w;
            for (uint32_t w = 0; w < ways_; ++w) ++ws[w].rrpv;
        }
    }

    void fill(uint32_t set, uint32_t w, const RefAccess& a) {
        auto& ws = ways_state_[set];
        ws[w].valid = true;
        ws[w].line = a.line;
        ws[w].has_sig = false;
        ws[w].reused = false;
        ws[w].prio = false;

        switch (kind_) {
        case trrip::PolicyKind::Lru:
        case trrip::PolicyKind::Emissary:
            stacks_[set].push_back(w);
            if (kind_ == trrip::PolicyKind::Emissary && a.instr) {
                uint32_t held = 0;
                for (uint32_t i = 0; i < ways_; ++i) held += ws[i].prio ? 1 : 0;
                if (held < quota_) ws[w].prio = true;
            }
            return;
        case trrip::PolicyKind::Srrip:
            ws[w].rrpv = 2;
            return;
        case trrip::PolicyKind::Brrip:
            ws[w].rrpv = (rng_.next() % 32 == 0) ? 2 : 3;
            return;
        case trrip::PolicyKind::Drrip: {
            int role = leader_role(set);
            bool brrip = role == 1 || (role == 2 && psel_ >= 512);
            ws[w].rrpv = brrip ? ((rng_.next() % 32 == 0) ? 2 : 3) : 2;
            return;
        }
        case trrip::PolicyKind::Clip:
            ws[w].rrpv = a.instr ? 0 : 2;
            return;
        case trrip::PolicyKind::Ship:
            if (a.instr) {
                uint64_t sig = mix(a.pc_line) & ((1u << 18) - 1);
                ws[w].sig = sig;
                ws[w].has_sig = true;
                ws[w].rrpv = (shct_[sig] == 0) ? 3 : 2;
            } else {
                ws[w].rrpv = 2;
            }
            return;
        case trrip::PolicyKind::Trrip1:
            ws[w].rrpv = (a.temp == trrip::Temperature::Hot) ? 0 : 2;
            return;
        case trrip::PolicyKind::Trrip2:
            if (a.temp == trrip::Temperature::Hot)
                ws[w].rrpv = 0;
            else if (a.temp == trrip::Temperature::Warm)
                ws[w].rrpv = 1;
            else
                ws[w].rrpv = 2;
            return;
        }
    }

    void remove_from_stack(uint32_t set, uint32_t w) {
        auto& st = stacks_[set];
        for (auto it = st.begin(); it != st.end(); ++it) {
            if (*it == w) {
                st.erase(it);
                return;
            }
        }
    }

    trrip::PolicyKind kind_;
    uint32_t sets_, ways_;
    trrip::ClipVariant clip_variant_;
    uint32_t quota_;
    Rng rng_{0};
    std::vector<std::vector<Way>> ways_state_;
    std::vector<std::deque<uint32_t>> stacks_;  // LRU order, front = coldest
    std::vector<uint8_t> shct_;
    int psel_ = 512;
};

}  // namespace refmodel

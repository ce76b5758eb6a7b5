#include "trrip/policy.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace trrip {

const char* to_string(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::Lru: return "lru";
    case PolicyKind::Srrip: return "srrip";
    case PolicyKind::Brrip: return "brrip";
    case PolicyKind::Drrip: return "drrip";
    case PolicyKind::Clip: return "clip";
    case PolicyKind::Ship: return "ship";
    case PolicyKind::Emissary: return "emissary";
    case PolicyKind::Trrip1: return "trrip1";
    case PolicyKind::Trrip2: return "trrip2";
    }
    return "?";
}

PolicyKind policy_from_name(const std::string& name) {
    for (PolicyKind k : {PolicyKind::Lru, PolicyKind::Srrip, PolicyKind::Brrip,
                         PolicyKind::Drrip, PolicyKind::Clip, PolicyKind::Ship,
                         PolicyKind::Emissary, PolicyKind::Trrip1, PolicyKind::Trrip2}) {
        if (name == to_string(k)) return k;
    }
    std::string all;
    for (const auto& n : policy_names()) all += (all.empty() ? "" : ", ") + n;
    throw ConfigError("unknown policy '" + name + "' (valid: " + all + ")");
}

std::vector<std::string> policy_names() {
    return {"lru", "srrip", "brrip", "drrip", "clip", "ship", "emissary", "trrip1", "trrip2"};
}

DuelRole duel_role(uint32_t set, uint32_t set_count, uint32_t leader_pairs) {
    uint32_t pairs = std::min(leader_pairs, set_count / 2);
    if (pairs == 0) return DuelRole::Follower;
    uint32_t period = set_count / pairs;
    if (set % period == 0) return DuelRole::LeaderA;
    if (set % period == 1) return DuelRole::LeaderB;
    return DuelRole::Follower;
}

uint64_t ship_signature(uint64_t pc_line, uint64_t table_entries) {
    return mix64(pc_line) & (table_entries - 1);
}

namespace {

// ---------------------------------------------------------------------------
// RRIP family. A single class covers SRRIP, BRRIP, DRRIP, CLIP, SHiP and both
// TRRIP variants: they share the RRPV array and the eviction search and only
// differ in insertion and hit promotion.
// ---------------------------------------------------------------------------
class RripPolicy : public ReplacementPolicy {
public:
    RripPolicy(PolicyKind kind, uint32_t sets, uint32_t ways, const PolicyParams& p,
               uint64_t seed)
        : kind_(kind), sets_(sets), ways_(ways), params_(p), rng_(seed) {
        max_rrpv_ = (1u << p.rrpv_bits) - 1;
        insert_long_ = max_rrpv_ - 1;  // Intermediate for 2-bit RRPV
        rrpv_.assign(size_t(sets) * ways, uint8_t(max_rrpv_));
        psel_max_ = (1u << p.psel_bits) - 1;
        psel_ = (psel_max_ + 1) / 2;
        if (kind == PolicyKind::Ship) {
            shct_.assign(p.shct_entries, 1);  // weakly reused
            sig_.assign(size_t(sets) * ways, 0);
            has_sig_.assign(size_t(sets) * ways, 0);
            reused_.assign(size_t(sets) * ways, 0);
        }
    }

    void on_hit(uint32_t set, uint32_t way, const AccessInfo& info) override {
        uint8_t& r = at(set, way);
        switch (kind_) {
        case PolicyKind::Trrip2:
            if (info.temp == Temperature::Hot) {
                r = 0;
            } else if (info.temp == Temperature::Warm || info.temp == Temperature::Cold) {
                r = uint8_t(r > 0 ? r - 1 : 0);
            } else {
                r = 0;
            }
            break;
        case PolicyKind::Clip: {
            bool variant_b = clip_uses_b(set);
            if (variant_b && info.cls == LineClass::Data)
                r = uint8_t(std::max<int>(int(r) - 1, 1));
            else
                r = 0;
            break;
        }
        case PolicyKind::Ship:
            r = 0;
            if (info.cls == LineClass::Instruction && has_sig_[idx(set, way)]) {
                reused_[idx(set, way)] = 1;
                uint8_t& c = shct_[sig_[idx(set, way)]];
                if (c < 3) ++c;
            }
            break;
        default:
            // SRRIP, BRRIP, DRRIP, TRRIP-1: hits promote to Immediate.
            r = 0;
            break;
        }
    }

    uint32_t choose_victim(uint32_t set) override {
        for (;;) {
            for (uint32_t w = 0; w < ways_; ++w)
                if (at(set, w) == max_rrpv_) return w;
            for (uint32_t w = 0; w < ways_; ++w) ++at(set, w);
        }
    }

    void on_fill(uint32_t set, uint32_t way, const AccessInfo& info) override {
        at(set, way) = insert_value(set, way, info);
    }

    void on_evict(uint32_t set, uint32_t way) override {
        if (kind_ == PolicyKind::Ship && has_sig_[idx(set, way)] && !reused_[idx(set, way)]) {
            uint8_t& c = shct_[sig_[idx(set, way)]];
            if (c > 0) --c;
        }
    }

    void on_invalidate(uint32_t set, uint32_t way) override {
        at(set, way) = uint8_t(max_rrpv_);
        if (kind_ == PolicyKind::Ship) has_sig_[idx(set, way)] = 0;
    }

    void on_demand_miss(uint32_t set) override {
        if (kind_ != PolicyKind::Drrip &&
            !(kind_ == PolicyKind::Clip && params_.clip_variant == ClipVariant::Duel))
            return;
        switch (duel_role(set, sets_, params_.leader_sets)) {
        case DuelRole::LeaderA:
            if (psel_ < psel_max_) ++psel_;
            break;
        case DuelRole::LeaderB:
            if (psel_ > 0) --psel_;
            break;
        case DuelRole::Follower:
            break;
        }
    }

    PolicyKind kind() const override { return kind_; }

    void audit_set(uint32_t set) const override {
        for (uint32_t w = 0; w < ways_; ++w)
            if (at(set, w) > max_rrpv_)
                throw std::logic_error("rrpv out of range");
    }

    uint32_t rrpv(uint32_t set, uint32_t way) const override { return at(set, way); }
    uint32_t psel() const override { return psel_; }

private:
    size_t idx(uint32_t set, uint32_t way) const { return size_t(set) * ways_ + way; }
    uint8_t& at(uint32_t set, uint32_t way) { return rrpv_[idx(set, way)]; }
    const uint8_t& at(uint32_t set, uint32_t way) const { return rrpv_[idx(set, way)]; }

    bool brrip_long_insert() {
        return rng_.next_below(params_.brrip_throttle) == 0;
    }

    bool follower_uses_brrip() const { return psel_ >= (psel_max_ + 1) / 2; }

    bool clip_uses_b(uint32_t set) const {
        switch (params_.clip_variant) {
        case ClipVariant::A: return false;
        case ClipVariant::B: return true;
        case ClipVariant::Duel:
            switch (duel_role(set, sets_, params_.leader_sets)) {
            case DuelRole::LeaderA: return false;
            case DuelRole::LeaderB: return true;
            case DuelRole::Follower: return follower_uses_brrip();
            }
        }
        return false;
    }

    uint8_t insert_value(uint32_t set, uint32_t way, const AccessInfo& info) {
        switch (kind_) {
        case PolicyKind::Srrip:
            return uint8_t(insert_long_);
        case PolicyKind::Brrip:
            return uint8_t(brrip_long_insert() ? insert_long_ : max_rrpv_);
        case PolicyKind::Drrip: {
            bool use_brrip;
            switch (duel_role(set, sets_, params_.leader_sets)) {
            case DuelRole::LeaderA: use_brrip = false; break;
            case DuelRole::LeaderB: use_brrip = true; break;
            default: use_brrip = follower_uses_brrip(); break;
            }
            if (use_brrip)
                return uint8_t(brrip_long_insert() ? insert_long_ : max_rrpv_);
            return uint8_t(insert_long_);
        }
        case PolicyKind::Clip:
            // Both variants insert instruction lines as Immediate.
            return uint8_t(info.cls == LineClass::Instruction ? 0 : insert_long_);
        case PolicyKind::Ship:
            if (info.cls == LineClass::Instruction) {
                uint64_t sig = ship_signature(info.pc_line, params_.shct_entries);
                sig_[idx(set, way)] = sig;
                has_sig_[idx(set, way)] = 1;
                reused_[idx(set, way)] = 0;
                return uint8_t(shct_[sig] == 0 ? max_rrpv_ : insert_long_);
            }
            has_sig_[idx(set, way)] = 0;
            return uint8_t(insert_long_);
        case PolicyKind::Trrip1:
            return uint8_t(info.temp == Temperature::Hot ? 0 : insert_long_);
        case PolicyKind::Trrip2:
            if (info.temp == Temperature::Hot) return 0;
            if (info.temp == Temperature::Warm) return 1;
            return uint8_t(insert_long_);
        default:
            return uint8_t(insert_long_);
        }
    }

    PolicyKind kind_;
    uint32_t sets_, ways_;
    PolicyParams params_;
    SplitMix64 rng_;
    uint32_t max_rrpv_ = 3, insert_long_ = 2;
    std::vector<uint8_t> rrpv_;
    uint32_t psel_ = 0, psel_max_ = 1023;
    // SHiP state
    std::vector<uint8_t> shct_;
    std::vector<uint64_t> sig_;
    std::vector<uint8_t> has_sig_;
    std::vector<uint8_t> reused_;
};

// ---------------------------------------------------------------------------
// LRU and Emissary. Emissary is LRU plus per-way priority bits with a per-set
// quota; victims come from the unprioritized ways unless all ways hold the bit.
// ---------------------------------------------------------------------------
class LruFamilyPolicy : public ReplacementPolicy {
public:
    LruFamilyPolicy(PolicyKind kind, uint32_t sets, uint32_t ways, const PolicyParams& p,
                    uint64_t seed)
        : kind_(kind), sets_(sets), ways_(ways), params_(p), rng_(seed) {
        rank_.resize(size_t(sets) * ways);
        for (uint32_t s = 0; s < sets; ++s)
            for (uint32_t w = 0; w < ways; ++w) rank_[idx(s, w)] = uint8_t(w);
        if (kind == PolicyKind::Emissary)
            prio_.assign(size_t(sets) * ways, 0);
    }

    void on_hit(uint32_t set, uint32_t way, const AccessInfo&) override {
        promote(set, way);
    }

    uint32_t choose_victim(uint32_t set) override {
        if (kind_ == PolicyKind::Emissary) {
            uint32_t victim = ways_;
            uint8_t best = std::numeric_limits<uint8_t>::max();
            for (uint32_t w = 0; w < ways_; ++w) {
                if (prio_[idx(set, w)]) continue;
                if (rank_[idx(set, w)] < best) {
                    best = rank_[idx(set, w)];
                    victim = w;
                }
            }
            if (victim != ways_) return victim;
            // Every way is prioritized: fall back to plain LRU.
        }
        for (uint32_t w = 0; w < ways_; ++w)
            if (rank_[idx(set, w)] == 0) return w;
        return 0;
    }

    void on_fill(uint32_t set, uint32_t way, const AccessInfo& info) override {
        promote(set, way);
        if (kind_ != PolicyKind::Emissary) return;
        prio_[idx(set, way)] = 0;
        if (!info.costly) return;
        if (params_.emissary_costly_prob < 1.0) {
            double draw = double(rng_.next() >> 11) * 0x1.0p-53;
            if (draw >= params_.emissary_costly_prob) return;
        }
        uint32_t held = 0;
        for (uint32_t w = 0; w < ways_; ++w) held += prio_[idx(set, w)];
        if (held < params_.emissary_priority_ways) prio_[idx(set, way)] = 1;
    }

    void on_invalidate(uint32_t set, uint32_t way) override {
        if (kind_ == PolicyKind::Emissary) prio_[idx(set, way)] = 0;
        // Rank is left in place; invalid ways are refilled before any
        // eviction, so stale ranks never pick a victim.
    }

    PolicyKind kind() const override { return kind_; }

    void audit_set(uint32_t set) const override {
        std::vector<bool> seen(ways_, false);
        for (uint32_t w = 0; w < ways_; ++w) {
            uint8_t r = rank_[idx(set, w)];
            if (r >= ways_ || seen[r]) throw std::logic_error("rank not a permutation");
            seen[r] = true;
        }
        if (kind_ == PolicyKind::Emissary) {
            uint32_t held = 0;
            for (uint32_t w = 0; w < ways_; ++w) held += prio_[idx(set, w)];
            if (held > params_.emissary_priority_ways)
                throw std::logic_error("emissary priority quota exceeded");
        }
    }

    uint32_t recency_rank(uint32_t set, uint32_t way) const override {
        return rank_[idx(set, way)];
    }
    bool priority_bit(uint32_t set, uint32_t way) const override {
        return kind_ == PolicyKind::Emissary && prio_[idx(set, way)];
    }

private:
    size_t idx(uint32_t set, uint32_t way) const { return size_t(set) * ways_ + way; }

    void promote(uint32_t set, uint32_t way) {
        uint8_t old = rank_[idx(set, way)];
        for (uint32_t w = 0; w < ways_; ++w)
            if (rank_[idx(set, w)] > old) --rank_[idx(set, w)];
        rank_[idx(set, way)] = uint8_t(ways_ - 1);
    }

    PolicyKind kind_;
    uint32_t sets_, ways_;
    PolicyParams params_;
    SplitMix64 rng_;
    std::vector<uint8_t> rank_;
    std::vector<uint8_t> prio_;
};

}  // namespace

std::unique_ptr<ReplacementPolicy> make_policy(PolicyKind kind, uint32_t sets,
                                               uint32_t ways, const PolicyParams& params,
                                               uint64_t seed) {
    switch (kind) {
    case PolicyKind::Lru:
    case PolicyKind::Emissary:
        return std::make_unique<LruFamilyPolicy>(kind, sets, ways, params, seed);
    default:
        return std::make_unique<RripPolicy>(kind, sets, ways, params, seed);
    }
}

uint32_t belady_victim(const std::vector<uint64_t>& resident_lines,
                       const std::vector<uint64_t>& future) {
    std::unordered_map<uint64_t, size_t> next_use;
    for (size_t i = future.size(); i-- > 0;) next_use[future[i]] = i;

    uint32_t victim = 0;
    size_t farthest = 0;
    bool have = false;
    for (uint32_t w = 0; w < resident_lines.size(); ++w) {
        auto it = next_use.find(resident_lines[w]);
        size_t dist = (it == next_use.end()) ? std::numeric_limits<size_t>::max() : it->second;
        if (!have || dist > farthest) {
            have = true;
            farthest = dist;
            victim = w;
        }
    }
    return victim;
}

}  // namespace trrip

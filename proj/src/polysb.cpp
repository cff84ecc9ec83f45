#include "psb/polysb.hpp"

#include <stdexcept>

namespace psb {

bool conducts(const PolyTransistor &t) {
    return t.cg == t.pg;
}

SbKey SbKey::from_string(const std::string &s) {
    if (s.size() != 8)
        throw std::invalid_argument("SB key must be 8 bits, got " + s);
    SbKey k;
    for (int i = 0; i < 8; ++i) {
        if (s[static_cast<size_t>(i)] != '0' && s[static_cast<size_t>(i)] != '1')
            throw std::invalid_argument("SB key must be binary: " + s);
        k.bits[static_cast<size_t>(i)] = s[static_cast<size_t>(i)] - '0';
    }
    return k;
}

std::string SbKey::to_string() const {
    std::string s(8, '0');
    for (int i = 0; i < 8; ++i)
        s[static_cast<size_t>(i)] = static_cast<char>('0' + bits[static_cast<size_t>(i)]);
    return s;
}

std::string sb_mode_name(SbMode m) {
    switch (m) {
    case SbMode::Parallel: return "parallel";
    case SbMode::Cross: return "cross";
    case SbMode::Corrupt: return "corrupt";
    }
    return "?";
}

RoutingMode resolve(const SbKey &key) {
    bool t1 = conducts(key.transistor(0)); // X-Z
    bool t2 = conducts(key.transistor(1)); // X-W
    bool t3 = conducts(key.transistor(2)); // Y-Z
    bool t4 = conducts(key.transistor(3)); // Y-W
    RoutingMode m;
    m.z_from_x = t1;
    m.z_from_y = t3;
    m.w_from_x = t2;
    m.w_from_y = t4;
    if (t1 && !t2 && !t3 && t4)
        m.tag = SbMode::Parallel;
    else if (!t1 && t2 && t3 && !t4)
        m.tag = SbMode::Cross;
    else
        m.tag = SbMode::Corrupt;
    return m;
}

KeyPartition enumerate_key_partition() {
    KeyPartition p;
    for (int v = 0; v < 256; ++v) {
        SbKey k;
        for (int i = 0; i < 8; ++i)
            k.bits[static_cast<size_t>(i)] = (v >> (7 - i)) & 1;
        switch (resolve(k).tag) {
        case SbMode::Parallel: ++p.parallel; break;
        case SbMode::Cross: ++p.cross; break;
        case SbMode::Corrupt: ++p.corrupt; break;
        }
    }
    return p;
}

SbOutputs route(const SbKey &key, TriWord x, TriWord y, Word width_mask,
                CorruptionPolicy policy) {
    RoutingMode m = resolve(key);
    auto drive = [&](bool from_x, bool from_y) -> TriWord {
        if (policy == CorruptionPolicy::WiredOr) {
            Word v = 0;
            if (from_x)
                v |= x.value;
            if (from_y)
                v |= y.value;
            return {v & width_mask, 0};
        }
        // Strict3V: floating output -> all unknown; contention -> unknown
        // where the two drivers differ or either driver bit is unknown.
        if (!from_x && !from_y)
            return {0, width_mask};
        if (from_x && !from_y)
            return {x.value & width_mask, x.unknown & width_mask};
        if (!from_x && from_y)
            return {y.value & width_mask, y.unknown & width_mask};
        Word unknown = (x.value ^ y.value) | x.unknown | y.unknown;
        return {x.value & ~unknown & width_mask, unknown & width_mask};
    };
    SbOutputs out;
    out.z = drive(m.z_from_x, m.z_from_y);
    out.w = drive(m.w_from_x, m.w_from_y);
    return out;
}

std::vector<SbKey> mode_keys(SbMode mode) {
    std::vector<SbKey> keys;
    for (int v = 0; v < 256; ++v) {
        SbKey k;
        for (int i = 0; i < 8; ++i)
            k.bits[static_cast<size_t>(i)] = (v >> (7 - i)) & 1;
        if (resolve(k).tag == mode)
            keys.push_back(k);
    }
    return keys;
}

} // namespace psb

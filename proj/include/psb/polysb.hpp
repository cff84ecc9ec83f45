#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace psb {

using Word = std::uint32_t;

struct PolyTransistor {
    int cg = 0;
    int pg = 0;
};

// Conduction rule for an ambipolar pass transistor: the device is on when
// the control-gate level matches the configured polarity.
bool conducts(const PolyTransistor &t);

// 8 key bits in order C1,P1,C2,P2,C3,P3,C4,P4. Transistor topology:
// T1: X-Z, T2: X-W, T3: Y-Z, T4: Y-W.
struct SbKey {
    std::array<int, 8> bits{};

    static SbKey from_string(const std::string &s); // "01001011"
    std::string to_string() const;
    PolyTransistor transistor(int i) const { return {bits[2 * i], bits[2 * i + 1]}; }
};

enum class SbMode { Parallel, Cross, Corrupt };

std::string sb_mode_name(SbMode m);

struct RoutingMode {
    SbMode tag = SbMode::Corrupt;
    bool z_from_x = false, z_from_y = false;
    bool w_from_x = false, w_from_y = false;
};

RoutingMode resolve(const SbKey &key);

struct KeyPartition {
    int parallel = 0;
    int cross = 0;
    int corrupt = 0;
};

// Exhaustive classification of all 256 keys.
KeyPartition enumerate_key_partition();

enum class CorruptionPolicy { WiredOr, Strict3V };

// A W-bit word with an unknown-bit mask (mask bits only under Strict3V).
struct TriWord {
    Word value = 0;
    Word unknown = 0;
    bool operator==(const TriWord &) const = default;
};

struct SbOutputs {
    TriWord z, w;
};

SbOutputs route(const SbKey &key, TriWord x, TriWord y, Word width_mask,
                CorruptionPolicy policy);

// All 16 keys realizing the given non-corrupt mode, ascending bit order.
std::vector<SbKey> mode_keys(SbMode mode);

} // namespace psb

#pragma once

#include "psb/netlist.hpp"
#include "psb/polysb.hpp"

#include <cstdint>
#include <optional>

namespace psb {

struct PortRef {
    int fu = -1;
    int port = 0;
    bool operator==(const PortRef &o) const { return fu == o.fu && port == o.port; }
};

struct SbSite {
    char kind = 'A';              // 'A': both nets enter one multi-register FU;
                                  // 'B': nets enter FUs of different resource types
    PortRef a, b;                 // the two spliced FU input ports
    std::vector<int> host_fus;    // 1 (kind A) or 2 (kind B)
    int impact = 0;               // distinct downstream registers reaching outputs
    std::string id;
};

struct SbInstance {
    int id = 0;
    SbSite site;
    std::optional<SbMode> mode;   // correct routing mode; absent in the foundry view
    std::string x_net, y_net;     // resolved drivers at splice time
};

// Transistor-count proxy; the SB spans the W-bit bus (4 transistors per
// bit slice) while sharing its 8 key bits.
struct AreaModel {
    double adder_per_bit = 28;
    double subtractor_per_bit = 30;
    double multiplier_per_bit2 = 20; // times W^2
    double register_per_bit = 8;
    double mux_per_input_bit = 6;
    double sb_per_bit = 4;

    double fu_area(OpKind kind, int W) const;
};

struct LockedDesign {
    DatapathNetlist netlist;      // SB output nets spliced into FU ports
    std::vector<SbInstance> sbs;
    std::vector<SbKey> golden;    // one per SB; empty in the foundry view
    CorruptionPolicy policy = CorruptionPolicy::WiredOr;
    double overhead_pct = 0.0;

    int sb_count() const { return static_cast<int>(sbs.size()); }
    int key_bits() const { return 8 * sb_count(); }
    bool redacted() const { return golden.empty() && sb_count() > 0; }
};

double base_area(const DatapathNetlist &nl, const AreaModel &model = {});
double area_overhead(const DatapathNetlist &nl, int sb_count, const AreaModel &model = {});

// All candidate insertion sites, deduplicated on unordered net pairs and
// sorted by descending impact then site id.
std::vector<SbSite> find_sites(const DatapathNetlist &nl);

struct LockOptions {
    double budget_pct = 20.0;     // max area overhead
    double cross_fraction = 0.5;  // share of SBs whose correct mode is Cross
    std::uint64_t seed = 0;
    int max_sbs = -1;             // optional hard cap on SB count
    AreaModel area;
    CorruptionPolicy policy = CorruptionPolicy::WiredOr;
};

LockedDesign insert_sbs(const DatapathNetlist &nl, const LockOptions &opt);

// Key text: per SB 8 chars C1P1C2P2C3P3C4P4, placement order, most
// significant SB first.
std::string golden_key_string(const LockedDesign &ld);
std::vector<SbKey> parse_design_key(const std::string &text, int sb_count);

std::string locked_to_json(const LockedDesign &ld, bool redact);
LockedDesign locked_from_json(const std::string &text);

// Foundry-view splice reversal used to check splice conservation.
DatapathNetlist strip_sbs(const LockedDesign &ld);

} // namespace psb

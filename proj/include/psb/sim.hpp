#pragma once

#include "psb/lock.hpp"
#include "psb/netlist.hpp"
#include "psb/polysb.hpp"

#include <map>

namespace psb {

struct SimInput {
    std::map<std::string, Word> values; // per primary input
};

struct SimResult {
    std::map<std::string, TriWord> outputs; // per primary output
};

SimResult simulate(const DatapathNetlist &nl, const SimInput &input);

// key must hold exactly one SbKey per SB.
SimResult simulate(const LockedDesign &ld, const std::vector<SbKey> &key, const SimInput &input);

struct ErrorRateReport {
    double overhead_pct = 0.0;
    int sb_count = 0;
    int trials = 0;
    double error_rate = 0.0;
    bool warning_no_sbs = false;
};

// n trials of (random wrong key, random input); a trial is erroneous iff
// any primary output differs from the golden-key result. Wrong keys are
// uniform over keys with at least one SB projection outside its correct
// mode class.
ErrorRateReport error_rate(const LockedDesign &ld, int trials, std::uint64_t seed);

// Precompiled engine for repeated simulation of one design.
class SimEngine {
  public:
    SimEngine(const DatapathNetlist &nl, const std::vector<SbInstance> &sbs,
              CorruptionPolicy policy);
    explicit SimEngine(const DatapathNetlist &nl) : SimEngine(nl, {}, CorruptionPolicy::WiredOr) {}

    // key: one entry per SB (ignored when there are none).
    SimResult run(const std::vector<SbKey> &key, const SimInput &input) const;

    int input_count() const { return static_cast<int>(nl_.input_order.size()); }

  private:
    struct NetRef {
        enum Kind { Reg, Mux, Fu, SbZ, SbW, None } kind = None;
        int index = 0;
    };
    NetRef compile(const std::string &net) const;

    const DatapathNetlist nl_;
    std::vector<SbInstance> sbs_;
    CorruptionPolicy policy_;
    Word mask_;
    std::vector<std::array<NetRef, 2>> fu_ports_;
    std::vector<std::array<NetRef, 2>> sb_ins_;
    std::vector<std::vector<int>> mux_src_regs_;
    std::vector<std::vector<std::pair<int, NetRef>>> loads_; // per step: (reg, src)
};

} // namespace psb

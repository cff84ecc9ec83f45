#pragma once

#include "psb/lock.hpp"
#include "psb/sim.hpp"
#include "psb/smt.hpp"

#include <functional>
#include <optional>

namespace psb {

using OracleConstraint = smt::OracleConstraint;
using OracleFn = std::function<SimResult(const SimInput &)>;

struct Dip {
    SimInput input;
    std::vector<SbKey> k1, k2;
};

enum class AttackStatus { KeyFound, Timeout, Infeasible };

std::string attack_status_name(AttackStatus s);

struct AttackResult {
    AttackStatus status = AttackStatus::Infeasible;
    std::vector<SbKey> key;
    int dips = 0;
    int iterations = 0;
    double wall_s = 0.0;
    std::string note;
    // Enumerative backend: consistent-key count after each DIP (strictly
    // decreasing by construction).
    std::vector<std::uint64_t> consistent_keys_log;
};

enum class AttackBackend { Enumerative, Smt };

struct AttackConfig {
    AttackBackend backend = AttackBackend::Enumerative;
    int max_iters = 1000;
    double timeout_s = 600.0;
    std::string solver_cmd; // empty: no external solver configured
    std::uint64_t seed = 0;
    int enum_capacity = 2;  // max SB count for the enumerative backend
};

struct CapacityExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Routing behavior of an SB is fully determined by the conduction pattern
// of its four transistors: 16 functional classes of 16 keys each.
int key_behavior(const SbKey &key);
SbKey behavior_representative(int behavior);

// A pair of constraint-consistent keys disagreeing on some input, if any.
std::optional<Dip> find_dip(const LockedDesign &ld,
                            const std::vector<OracleConstraint> &constraints,
                            const AttackConfig &cfg = {});

AttackResult attack_loop(const LockedDesign &foundry, const OracleFn &oracle,
                         const AttackConfig &cfg = {});

std::string attack_report_json(const AttackResult &r);

// Input patterns the enumerative backend probes: exhaustive when the
// total input width is at most 16 bits, otherwise 10^4 seeded samples.
std::vector<SimInput> probe_inputs(const DatapathNetlist &nl, std::uint64_t seed);

} // namespace psb

#include "psb/attack.hpp"

#include "psb/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>

using nlohmann::json;

namespace psb {

std::string attack_status_name(AttackStatus s) {
    switch (s) {
    case AttackStatus::KeyFound: return "KeyFound";
    case AttackStatus::Timeout: return "Timeout";
    case AttackStatus::Infeasible: return "Infeasible";
    }
    return "?";
}

int key_behavior(const SbKey &key) {
    int b = 0;
    for (int i = 0; i < 4; ++i)
        if (conducts(key.transistor(i)))
            b |= 1 << i;
    return b;
}

SbKey behavior_representative(int behavior) {
    SbKey k;
    for (int i = 0; i < 4; ++i) {
        k.bits[static_cast<size_t>(2 * i)] = 0;
        k.bits[static_cast<size_t>(2 * i + 1)] = (behavior >> i) & 1 ? 0 : 1;
    }
    return k;
}

std::vector<SimInput> probe_inputs(const DatapathNetlist &nl, std::uint64_t seed) {
    std::vector<SimInput> inputs;
    int n = static_cast<int>(nl.input_order.size());
    long total_bits = static_cast<long>(n) * nl.W;
    if (total_bits <= 16) {
        std::uint64_t count = std::uint64_t(1) << total_bits;
        for (std::uint64_t v = 0; v < count; ++v) {
            SimInput in;
            for (int i = 0; i < n; ++i)
                in.values[nl.input_order[static_cast<size_t>(i)]] =
                    static_cast<Word>((v >> (i * nl.W)) & ((std::uint64_t(1) << nl.W) - 1));
            inputs.push_back(in);
        }
    } else {
        Rng rng(Rng::mix(seed, 0xd1b5));
        for (int i = 0; i < 10000; ++i) {
            SimInput in;
            for (const auto &pi : nl.input_order)
                in.values[pi] = static_cast<Word>(rng.next());
            inputs.push_back(in);
        }
    }
    return inputs;
}

namespace {

// Candidate key-equivalence classes as base-16 behavior vectors.
struct EnumState {
    int x = 0;
    std::vector<std::uint64_t> classes; // packed behavior vectors, 4 bits per SB

    static EnumState all(int sb_count) {
        EnumState st;
        st.x = sb_count;
        std::uint64_t total = std::uint64_t(1) << (4 * sb_count);
        for (std::uint64_t v = 0; v < total; ++v)
            st.classes.push_back(v);
        return st;
    }

    static std::vector<SbKey> keys_of(std::uint64_t cls, int x) {
        std::vector<SbKey> keys;
        for (int s = 0; s < x; ++s)
            keys.push_back(behavior_representative(static_cast<int>((cls >> (4 * s)) & 0xf)));
        return keys;
    }

    // Total keys represented: 16 keys per SB behavior.
    std::uint64_t key_count() const {
        double per = std::pow(16.0, x);
        return static_cast<std::uint64_t>(classes.size()) * static_cast<std::uint64_t>(per);
    }
};

bool outputs_equal(const SimResult &a, const SimResult &b) {
    for (const auto &[id, v] : a.outputs) {
        const auto &w = b.outputs.at(id);
        if (v.value != w.value || v.unknown != w.unknown)
            return false;
    }
    return true;
}

void check_capacity(const LockedDesign &ld, const AttackConfig &cfg) {
    if (ld.sb_count() > cfg.enum_capacity)
        throw CapacityExceeded("enumerative backend capacity exceeded: design has " +
                               std::to_string(ld.sb_count()) + " SBs, capacity " +
                               std::to_string(cfg.enum_capacity));
}

EnumState filtered_state(const LockedDesign &ld, const SimEngine &engine,
                         const std::vector<OracleConstraint> &constraints) {
    auto st = EnumState::all(ld.sb_count());
    for (const auto &cst : constraints) {
        std::vector<std::uint64_t> keep;
        for (auto cls : st.classes)
            if (outputs_equal(engine.run(EnumState::keys_of(cls, st.x), cst.input), cst.output))
                keep.push_back(cls);
        st.classes = keep;
    }
    return st;
}

std::optional<Dip> enum_find_dip(const SimEngine &engine, const EnumState &st,
                                 const std::vector<SimInput> &inputs) {
    for (const auto &in : inputs) {
        bool first = true;
        SimResult ref;
        std::uint64_t ref_cls = 0;
        for (auto cls : st.classes) {
            auto out = engine.run(EnumState::keys_of(cls, st.x), in);
            if (first) {
                ref = out;
                ref_cls = cls;
                first = false;
            } else if (!outputs_equal(out, ref)) {
                Dip dip;
                dip.input = in;
                dip.k1 = EnumState::keys_of(ref_cls, st.x);
                dip.k2 = EnumState::keys_of(cls, st.x);
                return dip;
            }
        }
    }
    return std::nullopt;
}

std::vector<SbKey> decode_model_keys(const smt::SolverModel &model, const std::string &prefix,
                                     int sb_count) {
    std::vector<SbKey> keys;
    for (int s = 0; s < sb_count; ++s) {
        SbKey k;
        for (int b = 0; b < 8; ++b) {
            auto it = model.values.find(prefix + "_" + std::to_string(8 * s + b));
            k.bits[static_cast<size_t>(b)] = it != model.values.end() && it->second ? 1 : 0;
        }
        keys.push_back(k);
    }
    return keys;
}

} // namespace

std::optional<Dip> find_dip(const LockedDesign &ld,
                            const std::vector<OracleConstraint> &constraints,
                            const AttackConfig &cfg) {
    if (ld.sb_count() == 0)
        return std::nullopt;
    if (cfg.backend == AttackBackend::Smt && !cfg.solver_cmd.empty()) {
        auto model = smt::run_solver(cfg.solver_cmd, smt::to_smtlib_dip(ld, constraints));
        if (!model.sat)
            return std::nullopt;
        Dip dip;
        for (const auto &pi : ld.netlist.input_order) {
            auto it = model.values.find("in_" + pi);
            dip.input.values[pi] = it == model.values.end() ? 0 : static_cast<Word>(it->second);
        }
        dip.k1 = decode_model_keys(model, "ka", ld.sb_count());
        dip.k2 = decode_model_keys(model, "kb", ld.sb_count());
        return dip;
    }
    check_capacity(ld, cfg);
    SimEngine engine(ld.netlist, ld.sbs, ld.policy);
    auto st = filtered_state(ld, engine, constraints);
    return enum_find_dip(engine, st, probe_inputs(ld.netlist, cfg.seed));
}

AttackResult attack_loop(const LockedDesign &foundry, const OracleFn &oracle,
                         const AttackConfig &cfg) {
    auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    AttackResult result;
    if (foundry.sb_count() == 0) {
        result.status = AttackStatus::KeyFound;
        result.wall_s = elapsed();
        return result;
    }

    std::vector<OracleConstraint> constraints;

    if (cfg.backend == AttackBackend::Smt && !cfg.solver_cmd.empty()) {
        while (true) {
            if (result.iterations >= cfg.max_iters || elapsed() > cfg.timeout_s) {
                result.status = AttackStatus::Timeout;
                result.note = "budget exhausted with DIPs remaining";
                break;
            }
            ++result.iterations;
            auto dip = find_dip(foundry, constraints, cfg);
            if (!dip) {
                auto model = smt::run_solver(
                    cfg.solver_cmd, smt::to_smtlib_consistent_key(foundry, constraints));
                if (!model.sat) {
                    result.status = AttackStatus::Infeasible;
                    result.note = "no key consistent with the recorded constraints";
                } else {
                    result.status = AttackStatus::KeyFound;
                    result.key = decode_model_keys(model, "ka", foundry.sb_count());
                }
                break;
            }
            ++result.dips;
            constraints.push_back({dip->input, oracle(dip->input)});
        }
        result.wall_s = elapsed();
        return result;
    }

    try {
        check_capacity(foundry, cfg);
    } catch (const CapacityExceeded &e) {
        result.status = AttackStatus::Timeout;
        result.note = e.what();
        result.wall_s = elapsed();
        return result;
    }

    SimEngine engine(foundry.netlist, foundry.sbs, foundry.policy);
    auto st = EnumState::all(foundry.sb_count());
    auto inputs = probe_inputs(foundry.netlist, cfg.seed);
    while (true) {
        if (result.iterations >= cfg.max_iters || elapsed() > cfg.timeout_s) {
            result.status = AttackStatus::Timeout;
            result.note = "budget exhausted with DIPs remaining";
            break;
        }
        ++result.iterations;
        auto dip = enum_find_dip(engine, st, inputs);
        if (!dip) {
            if (st.classes.empty()) {
                result.status = AttackStatus::Infeasible;
                result.note = "no key consistent with the recorded constraints";
                break;
            }
            result.status = AttackStatus::KeyFound;
            result.key = EnumState::keys_of(st.classes.front(), st.x);
            break;
        }
        ++result.dips;
        auto response = oracle(dip->input);
        constraints.push_back({dip->input, response});
        std::uint64_t before = st.key_count();
        std::vector<std::uint64_t> keep;
        for (auto cls : st.classes)
            if (outputs_equal(engine.run(EnumState::keys_of(cls, st.x), dip->input), response))
                keep.push_back(cls);
        st.classes = keep;
        if (st.key_count() >= before)
            throw std::logic_error("DIP failed to reduce the consistent key set");
        result.consistent_keys_log.push_back(st.key_count());
    }
    result.wall_s = elapsed();
    return result;
}

std::string attack_report_json(const AttackResult &r) {
    json j;
    j["status"] = attack_status_name(r.status);
    std::string key;
    for (const auto &k : r.key)
        key += k.to_string();
    j["key"] = key;
    j["dips"] = r.dips;
    j["iterations"] = r.iterations;
    j["wall_s"] = r.wall_s;
    if (!r.note.empty())
        j["note"] = r.note;
    return j.dump(2) + "\n";
}

} // namespace psb

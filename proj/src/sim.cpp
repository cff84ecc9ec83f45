#include "psb/sim.hpp"

#include "psb/rng.hpp"

#include <stdexcept>

namespace psb {

namespace {

TriWord fu_eval(OpKind kind, TriWord a, TriWord b, Word mask) {
    if (a.unknown || b.unknown)
        return {0, mask}; // conservative: any unknown input poisons the result
    std::uint64_t x = a.value, y = b.value, r = 0;
    switch (kind) {
    case OpKind::Add: r = x + y; break;
    case OpKind::Sub: r = x - y; break;
    case OpKind::Mul: r = x * y; break;
    }
    return {static_cast<Word>(r) & mask, 0};
}

} // namespace

SimEngine::SimEngine(const DatapathNetlist &nl, const std::vector<SbInstance> &sbs,
                     CorruptionPolicy policy)
    : nl_(nl), sbs_(sbs), policy_(policy) {
    mask_ = nl_.W >= 32 ? ~Word(0) : (Word(1) << nl_.W) - 1;
    fu_ports_.resize(nl_.fus.size());
    for (size_t i = 0; i < nl_.fus.size(); ++i)
        for (int p = 0; p < 2; ++p)
            fu_ports_[i][static_cast<size_t>(p)] = compile(nl_.fus[i].port[static_cast<size_t>(p)]);
    sb_ins_.resize(sbs_.size());
    for (size_t i = 0; i < sbs_.size(); ++i) {
        sb_ins_[i][0] = compile(sbs_[i].x_net);
        sb_ins_[i][1] = compile(sbs_[i].y_net);
    }
    mux_src_regs_.resize(nl_.muxes.size());
    for (size_t i = 0; i < nl_.muxes.size(); ++i)
        for (const auto &in : nl_.muxes[i].ins) {
            auto ref = compile(in);
            if (ref.kind != NetRef::Reg)
                throw std::invalid_argument("mux input must be a register net: " + in);
            mux_src_regs_[i].push_back(ref.index);
        }
    loads_.resize(nl_.ctrl.size());
    for (size_t t = 0; t < nl_.ctrl.size(); ++t)
        for (const auto &ld : nl_.ctrl[t].loads)
            loads_[t].emplace_back(ld.reg, compile(ld.src));
}

SimEngine::NetRef SimEngine::compile(const std::string &net) const {
    if (net.empty())
        return {NetRef::None, 0};
    if (net.rfind("reg:", 0) == 0)
        return {NetRef::Reg, std::stoi(net.substr(4))};
    if (net.rfind("mux:", 0) == 0)
        return {NetRef::Mux, std::stoi(net.substr(4))};
    if (net.rfind("fu:", 0) == 0)
        return {NetRef::Fu, std::stoi(net.substr(3))};
    if (net.rfind("sb:", 0) == 0) {
        auto colon = net.rfind(':');
        int id = std::stoi(net.substr(3, colon - 3));
        return {net.substr(colon + 1) == "z" ? NetRef::SbZ : NetRef::SbW, id};
    }
    throw std::invalid_argument("unknown net: " + net);
}

SimResult SimEngine::run(const std::vector<SbKey> &key, const SimInput &input) const {
    if (key.size() != sbs_.size())
        throw std::invalid_argument("key length mismatch: design has " +
                                    std::to_string(sbs_.size()) + " SBs, key has " +
                                    std::to_string(key.size()));
    for (const auto &pi : nl_.input_order)
        if (!input.values.count(pi))
            throw std::invalid_argument("missing value for input " + pi);

    std::vector<TriWord> regs(static_cast<size_t>(nl_.reg_count));
    std::vector<TriWord> mux_val(nl_.muxes.size());
    std::vector<TriWord> fu_val(nl_.fus.size());
    std::vector<SbOutputs> sb_val(sbs_.size());

    for (const auto &[pi, reg] : nl_.inputs)
        regs[static_cast<size_t>(reg)] = {input.values.at(pi) & mask_, 0};

    auto value = [&](const NetRef &ref) -> TriWord {
        switch (ref.kind) {
        case NetRef::Reg: return regs[static_cast<size_t>(ref.index)];
        case NetRef::Mux: return mux_val[static_cast<size_t>(ref.index)];
        case NetRef::Fu: return fu_val[static_cast<size_t>(ref.index)];
        case NetRef::SbZ: return sb_val[static_cast<size_t>(ref.index)].z;
        case NetRef::SbW: return sb_val[static_cast<size_t>(ref.index)].w;
        case NetRef::None: return {0, 0};
        }
        return {0, 0};
    };

    for (int t = 1; t <= nl_.L; ++t) {
        const auto &cw = nl_.ctrl[static_cast<size_t>(t - 1)];
        for (size_t m = 0; m < mux_val.size(); ++m) {
            auto it = cw.sel.find(static_cast<int>(m));
            int code = it == cw.sel.end() ? 0 : it->second;
            mux_val[m] = regs[static_cast<size_t>(mux_src_regs_[m][static_cast<size_t>(code)])];
        }
        // SBs in id order; chained SBs only reference earlier ids.
        for (size_t s = 0; s < sbs_.size(); ++s)
            sb_val[s] = route(key[s], value(sb_ins_[s][0]), value(sb_ins_[s][1]), mask_, policy_);
        for (size_t f = 0; f < nl_.fus.size(); ++f)
            fu_val[f] = fu_eval(nl_.fus[f].kind, value(fu_ports_[f][0]), value(fu_ports_[f][1]),
                                mask_);
        for (const auto &[reg, src] : loads_[static_cast<size_t>(t - 1)])
            regs[static_cast<size_t>(reg)] = value(src);
    }

    SimResult result;
    for (const auto &[id, reg] : nl_.outputs)
        result.outputs[id] = regs[static_cast<size_t>(reg)];
    return result;
}

SimResult simulate(const DatapathNetlist &nl, const SimInput &input) {
    return SimEngine(nl).run({}, input);
}

SimResult simulate(const LockedDesign &ld, const std::vector<SbKey> &key, const SimInput &input) {
    return SimEngine(ld.netlist, ld.sbs, ld.policy).run(key, input);
}

namespace {

bool same_outputs(const SimResult &a, const SimResult &b) {
    if (a.outputs.size() != b.outputs.size())
        return false;
    for (const auto &[id, v] : a.outputs) {
        auto it = b.outputs.find(id);
        if (it == b.outputs.end() || it->second.value != v.value ||
            it->second.unknown != v.unknown)
            return false;
    }
    return true;
}

} // namespace

ErrorRateReport error_rate(const LockedDesign &ld, int trials, std::uint64_t seed) {
    if (trials < 1)
        throw std::invalid_argument("error_rate: trials must be >= 1");
    ErrorRateReport rep;
    rep.overhead_pct = ld.overhead_pct;
    rep.sb_count = ld.sb_count();
    rep.trials = trials;
    if (ld.sb_count() == 0) {
        rep.warning_no_sbs = true;
        return rep;
    }
    if (ld.golden.empty())
        throw std::invalid_argument("error_rate needs the golden key (full view)");

    SimEngine engine(ld.netlist, ld.sbs, ld.policy);
    std::vector<SbMode> golden_modes;
    for (const auto &sb : ld.sbs)
        golden_modes.push_back(*sb.mode);

    int errors = 0;
    for (int trial = 0; trial < trials; ++trial) {
        SimInput in;
        {
            Rng rin(Rng::mix(seed, 0x10000u + static_cast<std::uint64_t>(trial)));
            for (const auto &pi : ld.netlist.input_order)
                in.values[pi] = static_cast<Word>(rin.next());
        }
        // Uniform key conditioned on at least one SB outside its golden class.
        std::vector<SbKey> key(ld.sbs.size());
        for (std::uint64_t attempt = 0;; ++attempt) {
            bool any_wrong = false;
            for (size_t s = 0; s < key.size(); ++s) {
                Rng rk(Rng::mix(seed ^ 0xabcdef12u,
                                (static_cast<std::uint64_t>(trial) << 24) |
                                    (attempt << 8) | s));
                for (int b = 0; b < 8; ++b)
                    key[s].bits[static_cast<size_t>(b)] = static_cast<int>(rk.next() & 1);
                if (resolve(key[s]).tag != golden_modes[s])
                    any_wrong = true;
            }
            if (any_wrong)
                break;
        }
        auto got = engine.run(key, in);
        auto want = engine.run(ld.golden, in);
        if (!same_outputs(got, want))
            ++errors;
    }
    rep.error_rate = static_cast<double>(errors) / trials;
    return rep;
}

} // namespace psb

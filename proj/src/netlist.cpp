#include "psb/netlist.hpp"

#include <json.hpp>

#include <stdexcept>

using nlohmann::json;

namespace psb {

const NlFu &DatapathNetlist::fu(int id) const {
    for (const auto &f : fus)
        if (f.id == id)
            return f;
    throw std::out_of_range("unknown fu id " + std::to_string(id));
}

const NlMux &DatapathNetlist::mux(int id) const {
    for (const auto &m : muxes)
        if (m.id == id)
            return m;
    throw std::out_of_range("unknown mux id " + std::to_string(id));
}

namespace {

OpKind op_kind_from_name(const std::string &s) {
    if (s == "Add")
        return OpKind::Add;
    if (s == "Sub")
        return OpKind::Sub;
    if (s == "Mul")
        return OpKind::Mul;
    throw std::invalid_argument("unknown op kind " + s);
}

// Derived connectivity listing: every net with its source and sinks.
json build_nets(const DatapathNetlist &nl) {
    std::map<std::string, std::vector<std::string>> sinks;
    for (const auto &fu : nl.fus)
        for (int p = 0; p < 2; ++p)
            if (!fu.port[static_cast<size_t>(p)].empty())
                sinks[fu.port[static_cast<size_t>(p)]].push_back(
                    "fu:" + std::to_string(fu.id) + ".p" + std::to_string(p));
    for (const auto &m : nl.muxes)
        for (size_t i = 0; i < m.ins.size(); ++i)
            sinks[m.ins[i]].push_back("mux:" + std::to_string(m.id) + ".i" + std::to_string(i));
    for (size_t t = 0; t < nl.ctrl.size(); ++t)
        for (const auto &ld : nl.ctrl[t].loads)
            sinks[ld.src].push_back("reg:" + std::to_string(ld.reg) + "@" + std::to_string(t + 1));
    for (const auto &[pi, reg] : nl.inputs)
        sinks["pi:" + pi].push_back("reg:" + std::to_string(reg) + "@0");
    json nets = json::array();
    for (const auto &[net, sk] : sinks) {
        json n;
        n["id"] = net;
        n["sinks"] = sk;
        nets.push_back(n);
    }
    return nets;
}

} // namespace

std::string netlist_to_json(const DatapathNetlist &nl) {
    json j;
    j["meta"] = {{"W", nl.W}, {"L", nl.L}};
    j["inputs"] = json::array();
    for (const auto &pi : nl.input_order) {
        json e;
        e["id"] = pi;
        json regs = json::array();
        for (const auto &[id, reg] : nl.inputs)
            if (id == pi)
                regs.push_back(reg);
        e["regs"] = regs;
        j["inputs"].push_back(e);
    }
    j["outputs"] = json::array();
    for (const auto &[id, reg] : nl.outputs)
        j["outputs"].push_back({{"id", id}, {"reg", reg}});
    j["fus"] = json::array();
    for (const auto &fu : nl.fus) {
        json f;
        f["id"] = fu.id;
        f["type"] = fu.type;
        f["kind"] = op_kind_name(fu.kind);
        f["p0"] = fu.port[0];
        f["p1"] = fu.port[1];
        json nodes = json::array();
        for (const auto &[n, s] : fu.nodes)
            nodes.push_back({{"node", n}, {"step", s}});
        f["nodes"] = nodes;
        j["fus"].push_back(f);
    }
    j["regs"] = json::array();
    for (int r = 0; r < nl.reg_count; ++r)
        j["regs"].push_back({{"id", r}});
    j["muxes"] = json::array();
    for (const auto &m : nl.muxes)
        j["muxes"].push_back({{"id", m.id}, {"ins", m.ins}});
    j["nets"] = build_nets(nl);
    j["ctrl"] = json::array();
    for (const auto &cw : nl.ctrl) {
        json w;
        w["sel"] = json::object();
        for (const auto &[m, code] : cw.sel)
            w["sel"][std::to_string(m)] = code;
        w["load"] = json::array();
        for (const auto &ld : cw.loads)
            w["load"].push_back({{"reg", ld.reg}, {"src", ld.src}});
        j["ctrl"].push_back(w);
    }
    return j.dump(2) + "\n";
}

DatapathNetlist netlist_from_json(const std::string &text) {
    json j = json::parse(text);
    DatapathNetlist nl;
    nl.W = j.at("meta").at("W").get<int>();
    nl.L = j.at("meta").at("L").get<int>();
    for (const auto &e : j.at("inputs")) {
        nl.input_order.push_back(e.at("id").get<std::string>());
        for (const auto &r : e.at("regs"))
            nl.inputs.emplace_back(e.at("id").get<std::string>(), r.get<int>());
    }
    for (const auto &e : j.at("outputs"))
        nl.outputs.emplace_back(e.at("id").get<std::string>(), e.at("reg").get<int>());
    for (const auto &f : j.at("fus")) {
        NlFu fu;
        fu.id = f.at("id").get<int>();
        fu.type = f.at("type").get<std::string>();
        fu.kind = op_kind_from_name(f.at("kind").get<std::string>());
        fu.port[0] = f.at("p0").get<std::string>();
        fu.port[1] = f.at("p1").get<std::string>();
        for (const auto &n : f.at("nodes"))
            fu.nodes.emplace_back(n.at("node").get<std::string>(), n.at("step").get<int>());
        nl.fus.push_back(fu);
    }
    nl.reg_count = static_cast<int>(j.at("regs").size());
    for (const auto &m : j.at("muxes")) {
        NlMux mux;
        mux.id = m.at("id").get<int>();
        for (const auto &in : m.at("ins"))
            mux.ins.push_back(in.get<std::string>());
        nl.muxes.push_back(mux);
    }
    for (const auto &w : j.at("ctrl")) {
        ControlWord cw;
        for (auto it = w.at("sel").begin(); it != w.at("sel").end(); ++it)
            cw.sel[std::stoi(it.key())] = it.value().get<int>();
        for (const auto &ld : w.at("load"))
            cw.loads.push_back({ld.at("reg").get<int>(), ld.at("src").get<std::string>()});
        nl.ctrl.push_back(cw);
    }
    return nl;
}

} // namespace psb

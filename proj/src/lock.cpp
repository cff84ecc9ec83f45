#include "psb/lock.hpp"

#include "psb/bind.hpp"
#include "psb/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

using nlohmann::json;

namespace psb {

double AreaModel::fu_area(OpKind kind, int W) const {
    switch (kind) {
    case OpKind::Add: return adder_per_bit * W;
    case OpKind::Sub: return subtractor_per_bit * W;
    case OpKind::Mul: return multiplier_per_bit2 * W * W;
    }
    return 0;
}

double base_area(const DatapathNetlist &nl, const AreaModel &model) {
    double area = 0;
    for (const auto &fu : nl.fus)
        area += model.fu_area(fu.kind, nl.W);
    area += model.register_per_bit * nl.W * nl.reg_count;
    for (const auto &m : nl.muxes)
        area += model.mux_per_input_bit * nl.W * static_cast<double>(m.ins.size());
    // Register input selection: a register loaded from several distinct
    // sources needs a mux in front of its data input.
    std::map<int, std::set<std::string>> reg_srcs;
    for (const auto &cw : nl.ctrl)
        for (const auto &ld : cw.loads)
            reg_srcs[ld.reg].insert(ld.src);
    for (const auto &[pi, reg] : nl.inputs)
        reg_srcs[reg].insert("pi:" + pi);
    for (const auto &[reg, srcs] : reg_srcs)
        if (srcs.size() > 1)
            area += model.mux_per_input_bit * nl.W * static_cast<double>(srcs.size());
    return area;
}

double area_overhead(const DatapathNetlist &nl, int sb_count, const AreaModel &model) {
    if (sb_count <= 0)
        return 0.0;
    return 100.0 * model.sb_per_bit * nl.W * sb_count / base_area(nl, model);
}

namespace {

// Registers appearing in an FU input port cone (direct or via its mux).
std::set<int> port_regs(const DatapathNetlist &nl, const std::string &net) {
    std::set<int> regs;
    if (net.rfind("reg:", 0) == 0) {
        regs.insert(std::stoi(net.substr(4)));
    } else if (net.rfind("mux:", 0) == 0) {
        for (const auto &in : nl.mux(std::stoi(net.substr(4))).ins)
            for (int r : port_regs(nl, in))
                regs.insert(r);
    }
    return regs;
}

// Per register: can its value reach a primary output (through any chain
// of FU reads and register loads)?
std::vector<bool> output_reachable_regs(const DatapathNetlist &nl) {
    std::map<int, std::set<int>> fu_in_regs;  // fu -> registers it may read
    std::map<int, std::set<int>> fu_out_regs; // fu -> registers it loads
    for (const auto &fu : nl.fus)
        for (const auto &p : fu.port)
            for (int r : port_regs(nl, p))
                fu_in_regs[fu.id].insert(r);
    for (const auto &cw : nl.ctrl)
        for (const auto &ld : cw.loads)
            if (ld.src.rfind("fu:", 0) == 0)
                fu_out_regs[std::stoi(ld.src.substr(3))].insert(ld.reg);

    std::vector<bool> reach(static_cast<size_t>(nl.reg_count), false);
    for (const auto &[id, r] : nl.outputs)
        reach[static_cast<size_t>(r)] = true;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto &fu : nl.fus) {
            bool out_reaches = false;
            for (int r : fu_out_regs[fu.id])
                out_reaches = out_reaches || reach[static_cast<size_t>(r)];
            if (!out_reaches)
                continue;
            for (int r : fu_in_regs[fu.id])
                if (!reach[static_cast<size_t>(r)]) {
                    reach[static_cast<size_t>(r)] = true;
                    changed = true;
                }
        }
    }
    return reach;
}

int site_impact(const DatapathNetlist &nl, const std::vector<int> &hosts,
                const std::vector<bool> &reach) {
    std::set<int> regs;
    for (int fu : hosts) {
        std::string net = "fu:" + std::to_string(fu);
        for (const auto &cw : nl.ctrl)
            for (const auto &ld : cw.loads)
                if (ld.src == net && reach[static_cast<size_t>(ld.reg)])
                    regs.insert(ld.reg);
    }
    return static_cast<int>(regs.size());
}

} // namespace

std::vector<SbSite> find_sites(const DatapathNetlist &nl) {
    auto reach = output_reachable_regs(nl);
    std::vector<SbSite> sites;
    std::set<std::pair<std::string, std::string>> seen_pairs;
    auto pair_key = [](std::string u, std::string v) {
        return u < v ? std::make_pair(u, v) : std::make_pair(v, u);
    };

    for (const auto &fu : nl.fus) {
        if (fu.port[0].empty() || fu.port[1].empty() || fu.port[0] == fu.port[1])
            continue;
        if (fu_register_fanout(nl, fu.id) < 2)
            continue;
        SbSite s;
        s.kind = 'A';
        s.a = {fu.id, 0};
        s.b = {fu.id, 1};
        s.host_fus = {fu.id};
        s.id = "A:" + std::to_string(fu.id);
        if (!seen_pairs.insert(pair_key(fu.port[0], fu.port[1])).second)
            continue;
        s.impact = site_impact(nl, s.host_fus, reach);
        sites.push_back(s);
    }
    for (size_t i = 0; i < nl.fus.size(); ++i)
        for (size_t j = i + 1; j < nl.fus.size(); ++j) {
            const auto &f1 = nl.fus[i], &f2 = nl.fus[j];
            if (f1.type == f2.type)
                continue;
            for (int p1 = 0; p1 < 2; ++p1)
                for (int p2 = 0; p2 < 2; ++p2) {
                    const auto &n1 = f1.port[static_cast<size_t>(p1)];
                    const auto &n2 = f2.port[static_cast<size_t>(p2)];
                    if (n1.empty() || n2.empty() || n1 == n2)
                        continue;
                    if (!seen_pairs.insert(pair_key(n1, n2)).second)
                        continue;
                    SbSite s;
                    s.kind = 'B';
                    s.a = {f1.id, p1};
                    s.b = {f2.id, p2};
                    s.host_fus = {f1.id, f2.id};
                    s.id = "B:" + std::to_string(f1.id) + "." + std::to_string(p1) + "-" +
                           std::to_string(f2.id) + "." + std::to_string(p2);
                    s.impact = site_impact(nl, s.host_fus, reach);
                    sites.push_back(s);
                }
        }
    std::sort(sites.begin(), sites.end(), [](const SbSite &x, const SbSite &y) {
        if (x.impact != y.impact)
            return x.impact > y.impact;
        return x.id < y.id;
    });
    return sites;
}

namespace {

NlFu &fu_ref(DatapathNetlist &nl, int id) {
    for (auto &f : nl.fus)
        if (f.id == id)
            return f;
    throw std::out_of_range("unknown fu id " + std::to_string(id));
}

} // namespace

LockedDesign insert_sbs(const DatapathNetlist &nl, const LockOptions &opt) {
    LockedDesign ld;
    ld.netlist = nl;
    ld.policy = opt.policy;

    auto sites = find_sites(nl);
    std::vector<SbSite> chosen;
    for (const auto &s : sites) {
        int next = static_cast<int>(chosen.size()) + 1;
        if (opt.max_sbs >= 0 && next > opt.max_sbs)
            break;
        if (area_overhead(nl, next, opt.area) > opt.budget_pct)
            break;
        chosen.push_back(s);
    }

    Rng rng(Rng::mix(opt.seed, 0x5b0e1));
    int n_cross = static_cast<int>(
        std::ceil(opt.cross_fraction * static_cast<double>(chosen.size())));
    std::vector<size_t> idx(chosen.size());
    for (size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    for (size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.below(i)]);
    std::set<size_t> cross_set(idx.begin(), idx.begin() + n_cross);

    for (size_t i = 0; i < chosen.size(); ++i) {
        SbInstance sb;
        sb.id = static_cast<int>(i);
        sb.site = chosen[i];
        sb.mode = cross_set.count(i) ? SbMode::Cross : SbMode::Parallel;
        auto &fa = fu_ref(ld.netlist, sb.site.a.fu);
        auto &fb = fu_ref(ld.netlist, sb.site.b.fu);
        auto &pa = fa.port[static_cast<size_t>(sb.site.a.port)];
        auto &pb = fb.port[static_cast<size_t>(sb.site.b.port)];
        if (*sb.mode == SbMode::Parallel) {
            sb.x_net = pa;
            sb.y_net = pb;
        } else { // cross routing restores connectivity with swapped sources
            sb.x_net = pb;
            sb.y_net = pa;
        }
        pa = "sb:" + std::to_string(sb.id) + ":z";
        pb = "sb:" + std::to_string(sb.id) + ":w";
        auto keys = mode_keys(*sb.mode);
        ld.golden.push_back(keys[rng.below(keys.size())]);
        ld.sbs.push_back(sb);
    }
    ld.overhead_pct = area_overhead(nl, ld.sb_count(), opt.area);
    return ld;
}

std::string golden_key_string(const LockedDesign &ld) {
    std::string s;
    for (const auto &k : ld.golden)
        s += k.to_string();
    return s;
}

std::vector<SbKey> parse_design_key(const std::string &text, int sb_count) {
    std::string bits;
    for (char c : text)
        if (c == '0' || c == '1')
            bits.push_back(c);
    if (static_cast<int>(bits.size()) != 8 * sb_count)
        throw std::invalid_argument("design key must be " + std::to_string(8 * sb_count) +
                                    " bits, got " + std::to_string(bits.size()));
    std::vector<SbKey> keys;
    for (int i = 0; i < sb_count; ++i)
        keys.push_back(SbKey::from_string(bits.substr(static_cast<size_t>(8 * i), 8)));
    return keys;
}

std::string locked_to_json(const LockedDesign &ld, bool redact) {
    json j = json::parse(netlist_to_json(ld.netlist));
    j["policy"] = ld.policy == CorruptionPolicy::WiredOr ? "wired_or" : "strict3v";
    j["overhead_pct"] = ld.overhead_pct;
    j["key_bits"] = ld.key_bits();
    if (!redact && !ld.golden.empty())
        j["golden"] = golden_key_string(ld);
    j["sbs"] = json::array();
    for (const auto &sb : ld.sbs) {
        json s;
        s["id"] = sb.id;
        s["kind"] = std::string(1, sb.site.kind);
        s["site"] = sb.site.id;
        s["impact"] = sb.site.impact;
        s["a"] = {{"fu", sb.site.a.fu}, {"port", sb.site.a.port}};
        s["b"] = {{"fu", sb.site.b.fu}, {"port", sb.site.b.port}};
        s["hosts"] = sb.site.host_fus;
        s["x"] = sb.x_net;
        s["y"] = sb.y_net;
        if (!redact && sb.mode)
            s["mode"] = sb_mode_name(*sb.mode);
        j["sbs"].push_back(s);
    }
    return j.dump(2) + "\n";
}

LockedDesign locked_from_json(const std::string &text) {
    json j = json::parse(text);
    LockedDesign ld;
    ld.netlist = netlist_from_json(text);
    ld.policy = j.value("policy", "wired_or") == "strict3v" ? CorruptionPolicy::Strict3V
                                                           : CorruptionPolicy::WiredOr;
    ld.overhead_pct = j.value("overhead_pct", 0.0);
    for (const auto &s : j.at("sbs")) {
        SbInstance sb;
        sb.id = s.at("id").get<int>();
        sb.site.kind = s.at("kind").get<std::string>()[0];
        sb.site.id = s.at("site").get<std::string>();
        sb.site.impact = s.at("impact").get<int>();
        sb.site.a = {s.at("a").at("fu").get<int>(), s.at("a").at("port").get<int>()};
        sb.site.b = {s.at("b").at("fu").get<int>(), s.at("b").at("port").get<int>()};
        for (const auto &h : s.at("hosts"))
            sb.site.host_fus.push_back(h.get<int>());
        sb.x_net = s.at("x").get<std::string>();
        sb.y_net = s.at("y").get<std::string>();
        if (s.contains("mode")) {
            auto m = s.at("mode").get<std::string>();
            sb.mode = m == "cross" ? SbMode::Cross : SbMode::Parallel;
        }
        ld.sbs.push_back(sb);
    }
    if (j.contains("golden"))
        ld.golden = parse_design_key(j.at("golden").get<std::string>(), ld.sb_count());
    if (j.at("key_bits").get<int>() != ld.key_bits())
        throw std::invalid_argument("key_bits inconsistent with SB count");
    return ld;
}

DatapathNetlist strip_sbs(const LockedDesign &ld) {
    DatapathNetlist nl = ld.netlist;
    for (auto it = ld.sbs.rbegin(); it != ld.sbs.rend(); ++it) {
        const auto &sb = *it;
        if (!sb.mode)
            throw std::invalid_argument("strip_sbs needs correct modes (full view)");
        auto &pa = fu_ref(nl, sb.site.a.fu).port[static_cast<size_t>(sb.site.a.port)];
        auto &pb = fu_ref(nl, sb.site.b.fu).port[static_cast<size_t>(sb.site.b.port)];
        if (*sb.mode == SbMode::Parallel) {
            pa = sb.x_net;
            pb = sb.y_net;
        } else {
            pa = sb.y_net;
            pb = sb.x_net;
        }
    }
    return nl;
}

} // namespace psb

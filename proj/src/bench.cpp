#include "psb/bench.hpp"

#include "psb/bind.hpp"
#include "psb/rng.hpp"
#include "psb/sched.hpp"
#include "psb/sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace psb {

const std::vector<BenchSpec> &builtin_benches() {
    static const std::vector<BenchSpec> benches = {
        {"BM1", 40, 202, 405, 10, 16},  {"BM2", 45, 250, 451, 17, 20},
        {"BM3", 55, 261, 457, 25, 23},  {"BM4", 60, 265, 478, 36, 25},
        {"BM5", 68, 271, 482, 41, 28},  {"BM6", 79, 275, 489, 50, 31},
        {"BM7", 85, 301, 501, 55, 35},  {"BM8", 101, 354, 505, 67, 39},
        {"BM9", 110, 408, 510, 78, 55}, {"BM10", 112, 507, 521, 86, 64},
    };
    return benches;
}

std::optional<BenchSpec> find_bench(const std::string &name) {
    for (const auto &b : builtin_benches())
        if (b.name == name)
            return b;
    return std::nullopt;
}

namespace {

Dfg try_gen(const BenchSpec &spec, std::uint64_t seed) {
    Rng rng(seed);
    int N = spec.op_count, L = spec.schedule_length, P = spec.output_count;
    Dfg dfg;
    dfg.name = spec.name.empty() ? "bench" : spec.name;

    static const char *kinds[] = {"Add", "Sub", "Mul"};
    std::vector<int> layer(static_cast<size_t>(N));
    std::vector<std::string> ids(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) {
        layer[static_cast<size_t>(i)] = 1 + static_cast<int>((static_cast<long>(i) * L) / N);
        ids[static_cast<size_t>(i)] = "n" + std::to_string(i + 1);
        dfg.nodes.push_back({ids[static_cast<size_t>(i)], kinds[rng.below(3)]});
    }
    // Final-layer nodes can only feed primary outputs, so cap that layer
    // at the output count by demoting the earliest members.
    if (L > 1) {
        int last = 0;
        for (int l : layer)
            last += l == L ? 1 : 0;
        for (size_t i = 0; i < layer.size() && last > P; ++i)
            if (layer[i] == L) {
                layer[i] = L - 1;
                --last;
            }
    }

    int edge_seq = 0, pi_seq = 0;
    auto add_edge = [&](const std::string &src, const std::string &dst, int port) {
        dfg.edges.push_back({"e" + std::to_string(++edge_seq), src, dst, port});
    };
    auto fresh_pi = [&] {
        std::string id = "x" + std::to_string(++pi_seq);
        dfg.inputs.push_back(id);
        return id;
    };

    // Nodes with no consumer yet, by index; preferred as port sources so
    // every node keeps a path to some output.
    std::vector<int> uncovered;
    for (int i = 0; i < N; ++i) {
        int first_earlier = 0;
        while (first_earlier < i && layer[static_cast<size_t>(first_earlier)] <
                                        layer[static_cast<size_t>(i)])
            ++first_earlier;
        for (int port = 0; port < 2; ++port) {
            std::string src;
            auto unc = std::find_if(uncovered.begin(), uncovered.end(), [&](int u) {
                return layer[static_cast<size_t>(u)] < layer[static_cast<size_t>(i)];
            });
            bool pressure = static_cast<int>(uncovered.size()) >= P;
            if (unc != uncovered.end() && (pressure || rng.unit() < 0.7)) {
                // Take a random coverable entry, not just the first.
                std::vector<size_t> pool;
                for (size_t k = 0; k < uncovered.size(); ++k)
                    if (layer[static_cast<size_t>(uncovered[k])] < layer[static_cast<size_t>(i)])
                        pool.push_back(k);
                size_t pick = pool[rng.below(pool.size())];
                src = ids[static_cast<size_t>(uncovered[pick])];
                uncovered.erase(uncovered.begin() + static_cast<long>(pick));
            } else if (first_earlier > 0 && rng.unit() < 0.8) {
                src = ids[rng.below(static_cast<std::uint64_t>(first_earlier))];
            } else if (pi_seq > 0 && rng.unit() < 0.5) {
                src = dfg.inputs[rng.below(static_cast<std::uint64_t>(pi_seq))];
            } else {
                src = fresh_pi();
            }
            add_edge(src, ids[static_cast<size_t>(i)], port);
        }
        uncovered.push_back(i);
    }

    if (static_cast<int>(uncovered.size()) > P)
        throw InfeasibleSpec("sink count exceeds output count"); // caller retries
    for (int o = 0; o < P; ++o) {
        std::string id = "o" + std::to_string(o + 1);
        dfg.outputs.push_back(id);
        std::string src = o < static_cast<int>(uncovered.size())
                              ? ids[static_cast<size_t>(uncovered[static_cast<size_t>(o)])]
                              : ids[rng.below(static_cast<std::uint64_t>(N))];
        add_edge(src, id, -1);
    }

    dfg.optypes = builtin_optypes();
    dfg.index();
    dfg.validate();
    return dfg;
}

} // namespace

Dfg gen_bench(const BenchSpec &spec, std::uint64_t seed) {
    if (spec.op_count < 1 || spec.output_count < 1 || spec.schedule_length < 1)
        throw InfeasibleSpec("op_count, output_count, schedule_length must be >= 1");
    if (spec.schedule_length > spec.op_count)
        throw InfeasibleSpec("schedule_length exceeds op_count: no layering exists");
    if (spec.edge_count < spec.op_count)
        throw InfeasibleSpec("edge_count < op_count is unsatisfiable");
    for (int attempt = 0; attempt < 100; ++attempt) {
        try {
            return try_gen(spec, Rng::mix(seed, static_cast<std::uint64_t>(attempt)));
        } catch (const InfeasibleSpec &) {
            // resample
        }
    }
    throw InfeasibleSpec("no valid graph found for spec " + spec.name);
}

std::vector<MetricsRow> run_sweep(const ExperimentConfig &config) {
    std::vector<MetricsRow> rows;
    for (const auto &spec : config.benches)
        for (auto seed : config.seeds) {
            Dfg dfg;
            Schedule sched;
            DatapathNetlist nl;
            try {
                dfg = gen_bench(spec, seed);
                sched = schedule_secure(dfg, spec.schedule_length);
                nl = build_datapath(dfg, sched, allocate_fus(dfg, sched),
                                    allocate_registers(dfg, sched), config.W);
            } catch (const std::exception &e) {
                throw std::runtime_error("sweep point (" + spec.name + ", seed " +
                                         std::to_string(seed) + "): " + e.what());
            }
            for (double budget : config.overheads) {
                MetricsRow row;
                row.benchmark = spec.name;
                row.seed = seed;
                row.budget_pct = budget;
                row.trials = config.trials;
                try {
                    LockOptions opt;
                    opt.budget_pct = budget;
                    opt.cross_fraction = config.cross_fraction;
                    opt.seed = Rng::mix(seed, 0xbeef);
                    opt.policy = config.policy;
                    auto locked = insert_sbs(nl, opt);
                    row.sb_count = locked.sb_count();
                    row.overhead_pct = locked.overhead_pct;
                    row.key_bits = locked.key_bits();
                    auto rep = error_rate(locked, config.trials, Rng::mix(seed, 0x51e));
                    row.error_rate = rep.error_rate;
                    if (config.attack) {
                        SimEngine oracle_engine(locked.netlist, locked.sbs, locked.policy);
                        auto golden = locked.golden;
                        auto oracle = [&](const SimInput &in) {
                            return oracle_engine.run(golden, in);
                        };
                        auto ar = attack_loop(locked, oracle, config.attack_cfg);
                        row.attack_status = attack_status_name(ar.status);
                        row.attack_iterations = ar.iterations;
                    }
                } catch (const std::exception &e) {
                    throw std::runtime_error("sweep point (" + spec.name + ", seed " +
                                             std::to_string(seed) + ", budget " +
                                             std::to_string(budget) + "%): " + e.what());
                }
                rows.push_back(row);
            }
        }
    std::sort(rows.begin(), rows.end(), [](const MetricsRow &a, const MetricsRow &b) {
        if (a.benchmark != b.benchmark)
            return a.benchmark < b.benchmark;
        if (a.seed != b.seed)
            return a.seed < b.seed;
        return a.budget_pct < b.budget_pct;
    });
    return rows;
}

std::string metrics_csv(const std::vector<MetricsRow> &rows) {
    bool attack = std::any_of(rows.begin(), rows.end(),
                              [](const MetricsRow &r) { return !r.attack_status.empty(); });
    std::ostringstream out;
    out << "benchmark,seed,sb_count,overhead_pct,trials,error_rate";
    if (attack)
        out << ",attack_status,attack_iterations";
    out << "\n";
    char buf[64];
    for (const auto &r : rows) {
        std::snprintf(buf, sizeof buf, "%.4f,%d,%.6f", r.overhead_pct, r.trials, r.error_rate);
        out << r.benchmark << "," << r.seed << "," << r.sb_count << "," << buf;
        if (attack)
            out << "," << r.attack_status << "," << r.attack_iterations;
        out << "\n";
    }
    return out.str();
}

namespace {

std::string trim(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split_array(const std::string &v, int line) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw ParseError(line, "expected a one-line array");
    std::vector<std::string> items;
    std::string body = v.substr(1, v.size() - 2);
    std::istringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            items.push_back(item);
    }
    return items;
}

std::string unquote(const std::string &v, int line) {
    if (v.size() < 2 || v.front() != '"' || v.back() != '"')
        throw ParseError(line, "expected a quoted string");
    return v.substr(1, v.size() - 2);
}

} // namespace

ExperimentConfig parse_experiment_toml(const std::string &text) {
    ExperimentConfig cfg;
    cfg.benches.clear();
    std::istringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        auto hash = raw.find('#');
        std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty())
            continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ParseError(line, "expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        try {
            if (key == "benches") {
                for (const auto &item : split_array(val, line)) {
                    auto spec = find_bench(unquote(item, line));
                    if (!spec)
                        throw ParseError(line, "unknown benchmark " + item);
                    cfg.benches.push_back(*spec);
                }
            } else if (key == "seeds") {
                cfg.seeds.clear();
                for (const auto &item : split_array(val, line))
                    cfg.seeds.push_back(std::stoull(item));
            } else if (key == "overheads") {
                cfg.overheads.clear();
                for (const auto &item : split_array(val, line))
                    cfg.overheads.push_back(std::stod(item));
            } else if (key == "trials") {
                cfg.trials = std::stoi(val);
            } else if (key == "width") {
                cfg.W = std::stoi(val);
            } else if (key == "cross") {
                cfg.cross_fraction = std::stod(val);
            } else if (key == "policy") {
                std::string p = unquote(val, line);
                if (p == "wiredor")
                    cfg.policy = CorruptionPolicy::WiredOr;
                else if (p == "strict3v")
                    cfg.policy = CorruptionPolicy::Strict3V;
                else
                    throw ParseError(line, "unknown policy " + p);
            } else if (key == "attack") {
                if (val != "true" && val != "false")
                    throw ParseError(line, "expected true or false");
                cfg.attack = val == "true";
            } else if (key == "attack_backend") {
                std::string b = unquote(val, line);
                if (b == "enum")
                    cfg.attack_cfg.backend = AttackBackend::Enumerative;
                else if (b == "smt")
                    cfg.attack_cfg.backend = AttackBackend::Smt;
                else
                    throw ParseError(line, "unknown backend " + b);
            } else if (key == "max_iters") {
                cfg.attack_cfg.max_iters = std::stoi(val);
            } else if (key == "timeout_s") {
                cfg.attack_cfg.timeout_s = std::stod(val);
            } else if (key == "solver_cmd") {
                cfg.attack_cfg.solver_cmd = unquote(val, line);
            } else {
                throw ParseError(line, "unknown key " + key);
            }
        } catch (const ParseError &) {
            throw;
        } catch (const std::exception &) {
            throw ParseError(line, "bad value for " + key + ": " + val);
        }
    }
    if (cfg.seeds.empty() || cfg.overheads.empty())
        throw ValidationError("config needs non-empty seeds and overheads");
    return cfg;
}

} // namespace psb

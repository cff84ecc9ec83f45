#include "psb/attack.hpp"
#include "psb/bench.hpp"
#include "psb/bind.hpp"
#include "psb/dfg.hpp"
#include "psb/lock.hpp"
#include "psb/sched.hpp"
#include "psb/sim.hpp"
#include "psb/smt.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

std::string slurp(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string &path, const std::string &text) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

psb::SimInput parse_inputs(const psb::DatapathNetlist &nl, const std::string &spec) {
    psb::SimInput in;
    std::istringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad input assignment: " + item);
        in.values[item.substr(0, eq)] =
            static_cast<psb::Word>(std::stoul(item.substr(eq + 1), nullptr, 0));
    }
    for (const auto &pi : nl.input_order)
        if (!in.values.count(pi))
            throw std::runtime_error("missing value for input " + pi);
    return in;
}

int run(int argc, char **argv) {
    CLI::App app{"security-aware HLS, switch-box locking, and attack toolkit"};
    app.require_subcommand(1);

    // gen
    auto *gen = app.add_subcommand("gen", "generate a synthetic benchmark DFG");
    std::string gen_bench_name, gen_out = "-";
    std::uint64_t gen_seed = 0;
    psb::BenchSpec gen_spec;
    gen->add_option("--bench", gen_bench_name, "builtin preset (BM1..BM10)");
    gen->add_option("--ops", gen_spec.op_count, "operator count");
    gen->add_option("--latency", gen_spec.schedule_length, "schedule length");
    gen->add_option("--edges", gen_spec.edge_count, "edge count target");
    gen->add_option("--outputs", gen_spec.output_count, "primary output count");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output .dfg path ('-' = stdout)");

    // hls
    auto *hls = app.add_subcommand("hls", "schedule, allocate, and emit a netlist");
    std::string hls_dfg, hls_out = "netlist.json", hls_sched;
    int hls_latency = 0, hls_width = 8;
    hls->add_option("--dfg", hls_dfg, "input .dfg file")->required();
    hls->add_option("--latency", hls_latency, "latency bound (default: critical path)");
    hls->add_option("--width", hls_width, "datapath word width in bits");
    hls->add_option("--out", hls_out, "netlist JSON output path");
    hls->add_option("--sched", hls_sched, "also dump the schedule to this path");

    // lock
    auto *lock = app.add_subcommand("lock", "insert switch boxes under an area budget");
    std::string lock_nl, lock_out = "locked.json", lock_redacted, lock_key = "golden.key";
    psb::LockOptions lock_opt;
    bool lock_redact_flag = false;
    lock->add_option("--netlist", lock_nl, "netlist JSON from hls")->required();
    lock->add_option("--budget", lock_opt.budget_pct, "max area overhead percent");
    lock->add_option("--cross", lock_opt.cross_fraction, "fraction of cross-mode SBs");
    lock->add_option("--seed", lock_opt.seed, "mode/key selection seed");
    lock->add_option("--max-sbs", lock_opt.max_sbs, "hard cap on SB count");
    lock->add_option("--out", lock_out, "locked design JSON (full view)");
    lock->add_option("--key", lock_key, "golden key text output path");
    lock->add_flag("--redact", lock_redact_flag, "also emit the foundry view");
    lock->add_option("--redacted-out", lock_redacted, "foundry view path (implies --redact)");

    // sim
    auto *sim = app.add_subcommand("sim", "simulate a netlist or locked design");
    std::string sim_design, sim_key_text, sim_key_file, sim_inputs;
    int sim_trials = 0;
    std::uint64_t sim_seed = 0;
    sim->add_option("--design", sim_design, "netlist or locked-design JSON")->required();
    sim->add_option("--key", sim_key_text, "design key (8 chars per SB)");
    sim->add_option("--key-file", sim_key_file, "read the key from a file");
    sim->add_option("--inputs", sim_inputs, "comma list: x1=3,x2=0x1f");
    sim->add_option("--error-rate", sim_trials, "run N wrong-key trials instead");
    sim->add_option("--seed", sim_seed, "trial seed for --error-rate");

    // attack
    auto *atk = app.add_subcommand("attack", "oracle-guided DIP attack");
    std::string atk_foundry, atk_oracle, atk_backend = "enum", atk_out = "-";
    psb::AttackConfig atk_cfg;
    atk->add_option("--design", atk_foundry, "foundry-view locked JSON")->required();
    atk->add_option("--oracle", atk_oracle, "full-view locked JSON acting as the oracle")
        ->required();
    atk->add_option("--backend", atk_backend, "enum or smt")
        ->check(CLI::IsMember({"enum", "smt"}));
    atk->add_option("--max-iters", atk_cfg.max_iters, "DIP iteration budget");
    atk->add_option("--timeout-s", atk_cfg.timeout_s, "wall-time budget in seconds");
    atk->add_option("--solver-cmd", atk_cfg.solver_cmd, "external QF_BV solver command");
    atk->add_option("--seed", atk_cfg.seed, "probe sampling seed");
    atk->add_option("--out", atk_out, "report JSON path ('-' = stdout)");

    // sweep
    auto *sweep = app.add_subcommand("sweep", "run the benchmark x overhead grid");
    std::string sweep_config, sweep_out = "metrics.csv";
    sweep->add_option("--config", sweep_config, "TOML experiment config")->required();
    sweep->add_option("--out", sweep_out, "metrics CSV path");

    // report
    auto *report = app.add_subcommand("report", "aggregate metrics CSV into plot data");
    std::string report_csv, report_out = "-";
    report->add_option("--csv", report_csv, "metrics CSV from sweep")->required();
    report->add_option("--out", report_out, "plot data path ('-' = stdout)");

    CLI11_PARSE(app, argc, argv);

    auto emit = [&](const std::string &path, const std::string &text) {
        if (path == "-")
            std::cout << text;
        else
            spit(path, text);
    };

    if (*gen) {
        psb::BenchSpec spec = gen_spec;
        if (!gen_bench_name.empty()) {
            auto found = psb::find_bench(gen_bench_name);
            if (!found)
                throw std::runtime_error("unknown benchmark " + gen_bench_name);
            spec = *found;
        } else {
            spec.name = "custom";
        }
        emit(gen_out, psb::print_dfg(psb::gen_bench(spec, gen_seed)));
        return 0;
    }
    if (*hls) {
        auto dfg = psb::parse_dfg(slurp(hls_dfg));
        int L = hls_latency > 0 ? hls_latency : psb::critical_path_length(dfg);
        auto sched = psb::schedule_secure(dfg, L);
        auto nl = psb::build_datapath(dfg, sched, psb::allocate_fus(dfg, sched),
                                      psb::allocate_registers(dfg, sched), hls_width);
        spit(hls_out, psb::netlist_to_json(nl));
        if (!hls_sched.empty())
            spit(hls_sched, psb::dump_schedule(dfg, sched));
        return 0;
    }
    if (*lock) {
        auto nl = psb::netlist_from_json(slurp(lock_nl));
        auto locked = psb::insert_sbs(nl, lock_opt);
        if (locked.sb_count() == 0)
            std::cerr << "warning: budget admits zero switch boxes\n";
        spit(lock_out, psb::locked_to_json(locked, false));
        spit(lock_key, psb::golden_key_string(locked) + "\n");
        if (lock_redact_flag || !lock_redacted.empty())
            spit(lock_redacted.empty() ? "foundry.json" : lock_redacted,
                 psb::locked_to_json(locked, true));
        std::cout << "sbs " << locked.sb_count() << " key_bits " << locked.key_bits()
                  << " overhead_pct " << locked.overhead_pct << "\n";
        return 0;
    }
    if (*sim) {
        auto text = slurp(sim_design);
        psb::LockedDesign ld;
        if (text.find("\"sbs\"") != std::string::npos) {
            ld = psb::locked_from_json(text);
        } else {
            ld.netlist = psb::netlist_from_json(text);
        }
        std::vector<psb::SbKey> key;
        std::string key_text = sim_key_text;
        if (!sim_key_file.empty()) {
            key_text = slurp(sim_key_file);
            while (!key_text.empty() && (key_text.back() == '\n' || key_text.back() == '\r'))
                key_text.pop_back();
        }
        if (!key_text.empty())
            key = psb::parse_design_key(key_text, ld.sb_count());
        else if (ld.sb_count() > 0 && !ld.golden.empty())
            key = ld.golden;
        if (sim_trials > 0) {
            auto rep = psb::error_rate(ld, sim_trials, sim_seed);
            std::cout << "sb_count " << rep.sb_count << " trials " << rep.trials
                      << " error_rate " << rep.error_rate << "\n";
            return 0;
        }
        if (sim_inputs.empty())
            throw std::runtime_error("--inputs or --error-rate required");
        auto result = psb::simulate(ld, key, parse_inputs(ld.netlist, sim_inputs));
        for (const auto &[id, v] : result.outputs) {
            std::cout << id << " " << v.value;
            if (v.unknown)
                std::cout << " unknown_mask " << v.unknown;
            std::cout << "\n";
        }
        return 0;
    }
    if (*atk) {
        auto foundry = psb::locked_from_json(slurp(atk_foundry));
        auto full = psb::locked_from_json(slurp(atk_oracle));
        if (full.golden.empty() && full.sb_count() > 0)
            throw std::runtime_error("--oracle must be the full view (golden key present)");
        atk_cfg.backend =
            atk_backend == "smt" ? psb::AttackBackend::Smt : psb::AttackBackend::Enumerative;
        psb::SimEngine engine(full.netlist, full.sbs, full.policy);
        auto oracle = [&](const psb::SimInput &in) { return engine.run(full.golden, in); };
        auto result = psb::attack_loop(foundry, oracle, atk_cfg);
        emit(atk_out, psb::attack_report_json(result));
        return result.status == psb::AttackStatus::KeyFound ? 0 : 2;
    }
    if (*sweep) {
        auto cfg = psb::parse_experiment_toml(slurp(sweep_config));
        emit(sweep_out, psb::metrics_csv(psb::run_sweep(cfg)));
        return 0;
    }
    if (*report) {
        // Mean error rate per (benchmark, overhead budget) across seeds,
        // one gnuplot block per benchmark.
        std::istringstream in(slurp(report_csv));
        std::string line;
        if (!std::getline(in, line))
            throw std::runtime_error("empty CSV");
        std::map<std::string, std::map<double, std::pair<double, int>>> acc;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            std::istringstream row(line);
            std::string bench, seed, sbs, overhead, trials, rate;
            std::getline(row, bench, ',');
            std::getline(row, seed, ',');
            std::getline(row, sbs, ',');
            std::getline(row, overhead, ',');
            std::getline(row, trials, ',');
            std::getline(row, rate, ',');
            auto &slot = acc[bench][std::stod(overhead)];
            slot.first += std::stod(rate);
            slot.second += 1;
        }
        std::ostringstream out;
        out << "# benchmark overhead_pct mean_error_rate\n";
        for (const auto &[bench, points] : acc) {
            for (const auto &[overhead, sum] : points)
                out << bench << " " << overhead << " " << sum.first / sum.second << "\n";
            out << "\n";
        }
        emit(report_out, out.str());
        return 0;
    }
    return 1;
}

} // namespace

int main(int argc, char **argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

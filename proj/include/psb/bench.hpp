#pragma once

#include "psb/attack.hpp"
#include "psb/dfg.hpp"
#include "psb/lock.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace psb {

struct BenchSpec {
    std::string name;
    int schedule_length = 1; // latency bound; generated CP never exceeds it
    int op_count = 1;
    int edge_count = 3;      // soft target; see gen_bench
    int output_count = 1;
    int sb_count = 0;        // target SB count for key-size bookkeeping
};

// BM1..BM10 presets.
const std::vector<BenchSpec> &builtin_benches();
std::optional<BenchSpec> find_bench(const std::string &name);

struct InfeasibleSpec : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Seeded layered random DAG with op_count nodes, output_count outputs, a
// mix of Add/Sub/Mul, and critical path <= schedule_length. Binary
// operators pin the edge count at 2*op_count + output_count, so
// edge_count is advisory; specs violating edge_count >= op_count are
// rejected as infeasible.
Dfg gen_bench(const BenchSpec &spec, std::uint64_t seed);

struct ExperimentConfig {
    std::vector<BenchSpec> benches;
    std::vector<std::uint64_t> seeds{0};
    std::vector<double> overheads{0, 5, 10, 15, 20}; // budget grid, percent
    int trials = 1000;
    int W = 8;
    double cross_fraction = 0.5;
    CorruptionPolicy policy = CorruptionPolicy::WiredOr;
    bool attack = false;        // append attack columns when set
    AttackConfig attack_cfg;
};

struct MetricsRow {
    std::string benchmark;
    std::uint64_t seed = 0;
    double budget_pct = 0.0;    // grid point (sort key, not a CSV column)
    int sb_count = 0;
    double overhead_pct = 0.0;  // achieved
    int trials = 0;
    double error_rate = 0.0;
    int key_bits = 0;
    std::string attack_status;  // empty when attack disabled
    int attack_iterations = 0;
};

std::vector<MetricsRow> run_sweep(const ExperimentConfig &config);

// CSV contract: benchmark,seed,sb_count,overhead_pct,trials,error_rate
// plus ,attack_status,attack_iterations when any row carries a status.
std::string metrics_csv(const std::vector<MetricsRow> &rows);

// Minimal flat TOML subset: `key = value` lines with string, integer,
// float, boolean, and one-line array values; # comments.
ExperimentConfig parse_experiment_toml(const std::string &text);

} // namespace psb

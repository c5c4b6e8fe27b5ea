#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/attack.hpp"
#include "fedsim/config.hpp"
#include "fedsim/data_gen.hpp"
#include "fedsim/defense.hpp"
#include "fedsim/fl.hpp"
#include "fedsim/record.hpp"

namespace fedsim {

enum class Scenario { Stable, Early };

/// Plateau detection used to emulate a converged model: stop the warm-up
/// when test accuracy improves by less than min_improvement over the last
/// `window` rounds (bounded by max_rounds).
struct StabilizeParams {
    int window = 20;
    double min_improvement = 0.002;
    int max_rounds = 400;
};

struct ExperimentConfig {
    std::uint64_t master_seed = 42;
    Scenario scenario = Scenario::Stable;
    int end_round = 50;
    int defense_start_round = 21;
    std::vector<int> poison_rounds = {30, 35, 40};
    int repetitions = 5;
    bool adaptive = false;
    int adaptive_max_iters = 5;
    int attacker_epochs = 20;
    std::vector<int> malicious_validator_ids;

    int num_classes = 10;
    int feature_dim = 20;
    int samples_per_class = 200;
    double cluster_spread = 1.0;
    std::vector<int> hidden_dims;

    double client_share = 0.9;
    double dirichlet_alpha = 0.9;

    FlConfig fl;
    DefenseConfig defense;
    BackdoorSpec backdoor{BackdoorSpec::Mode::LabelFlip, 1, {}, 7, 0.5};
    StabilizeParams stabilize;

    KvDoc to_kv() const;
    static ExperimentConfig from_kv(const KvDoc& doc);
    void check_valid() const;
};

struct RateStat {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation over repetitions
};

struct Report {
    KvDoc config_echo;
    std::vector<std::vector<RoundRecord>> runs;  // one record list per repetition
    std::vector<std::optional<double>> fp_per_rep;
    std::vector<std::optional<double>> fn_per_rep;
    std::optional<RateStat> fp_rate;  // absent when no repetition had clean active rounds
    std::optional<RateStat> fn_rate;  // absent when no repetition had poisoned active rounds
};

/// One repetition's outcome plus ground-truth counters for the attacker.
struct SingleRunResult {
    std::vector<RoundRecord> records;
    int stabilization_rounds = 0;
    int adaptive_submitted = 0;  // adaptive candidates that passed the attacker-side check
    int adaptive_rejected = 0;   // of those, rejected by the feedback loop
    int attacker_gave_up = 0;    // scheduled injections abandoned after max_iters
};

/// Runs one repetition with its derived seed.
SingleRunResult run_single(const ExperimentConfig& config, std::uint64_t seed);

/// Runs all repetitions (seeds derived from master_seed) and aggregates
/// FP/FN rates over defense-active rounds.
Report run_experiment(const ExperimentConfig& config);

/// Grid over lookback, quorum, and client share; empty axes keep the base
/// value. Every grid point shares the base master seed.
struct SweepGrid {
    std::vector<int> lookbacks;
    std::vector<int> quorums;
    std::vector<double> client_shares;
};

std::vector<Report> sweep(const ExperimentConfig& base, const SweepGrid& grid);

/// Bytes each validator downloads per round: the lookback window plus the
/// candidate, shrunk by the compression factor.
double comm_overhead(double model_bytes, int lookback, double compression_factor);

enum class ReportFormat { Kv, Json };

struct EmittedFiles {
    std::string summary;
    std::vector<std::string> round_tables;  // empty for the json format
};

/// Writes the summary document and one per-round table per repetition into
/// out_dir; filenames carry the config hash.
EmittedFiles emit_report(const Report& report, ReportFormat format, const std::string& out_dir);

/// Sweep summary with one row block per grid point.
std::string emit_sweep_summary(const std::vector<Report>& reports, const std::string& out_dir);

std::vector<RoundRecord> parse_round_table(const std::string& path);
Report parse_report_json(const std::string& path);

}  // namespace fedsim

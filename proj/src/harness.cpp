#include "fedsim/harness.hpp"

#include <algorithm>
#include <cmath>

namespace fedsim {

namespace {

constexpr std::uint64_t kDataTag = 0x64617461ull;      // "data"
constexpr std::uint64_t kSplitTag = 0x73706c74ull;     // "splt"
constexpr std::uint64_t kPartTag = 0x70617274ull;      // "part"
constexpr std::uint64_t kInitTag = 0x696e6974ull;      // "init"
constexpr std::uint64_t kTrainTag = 0x7472616eull;     // "tran"
constexpr std::uint64_t kSelectTag = 0x73656c63ull;    // "selc"
constexpr std::uint64_t kAttackTag = 0x6174746bull;    // "attk"

std::string scenario_name(Scenario s) { return s == Scenario::Stable ? "stable" : "early"; }

Scenario scenario_from(const std::string& s) {
    if (s == "stable") return Scenario::Stable;
    if (s == "early") return Scenario::Early;
    throw ConfigError("unknown scenario: " + s);
}

std::string mode_name(DefenseMode m) {
    switch (m) {
        case DefenseMode::ServerOnly: return "server_only";
        case DefenseMode::ClientsOnly: return "clients_only";
        case DefenseMode::Combined: return "combined";
    }
    return "?";
}

DefenseMode mode_from(const std::string& s) {
    if (s == "server_only") return DefenseMode::ServerOnly;
    if (s == "clients_only") return DefenseMode::ClientsOnly;
    if (s == "combined") return DefenseMode::Combined;
    throw ConfigError("unknown defense mode: " + s);
}

std::string backdoor_mode_name(BackdoorSpec::Mode m) {
    return m == BackdoorSpec::Mode::LabelFlip ? "label_flip" : "semantic_trigger";
}

BackdoorSpec::Mode backdoor_mode_from(const std::string& s) {
    if (s == "label_flip") return BackdoorSpec::Mode::LabelFlip;
    if (s == "semantic_trigger") return BackdoorSpec::Mode::SemanticTrigger;
    throw ConfigError("unknown backdoor mode: " + s);
}

// The designated attacker: the client holding the most backdoor-affected
// samples (lowest id on ties), mirroring the source-class choice that
// favors the adversary.
int pick_attacker(const std::vector<LabeledDataset>& shards, const BackdoorSpec& spec) {
    int best_id = 0;
    std::size_t best_count = 0;
    for (std::size_t c = 0; c < shards.size(); ++c) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < shards[c].size(); ++i)
            if (spec.affects(shards[c].row(i), shards[c].labels[i])) ++count;
        if (count > best_count) {
            best_count = count;
            best_id = static_cast<int>(c);
        }
    }
    return best_id;
}

std::optional<RateStat> aggregate_rates(const std::vector<std::optional<double>>& per_rep) {
    std::vector<double> values;
    for (const auto& v : per_rep)
        if (v) values.push_back(*v);
    if (values.empty()) return std::nullopt;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    if (values.size() > 1) {
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size() - 1);
    }
    return RateStat{mean, std::sqrt(var)};
}

}  // namespace

KvDoc ExperimentConfig::to_kv() const {
    KvDoc doc;
    doc.set_u64("master_seed", master_seed);
    doc.set("scenario", scenario_name(scenario));
    doc.set_int("end_round", end_round);
    doc.set_int("defense_start_round", defense_start_round);
    doc.set_int_list("poison_rounds", poison_rounds);
    doc.set_int("repetitions", repetitions);
    doc.set_bool("adaptive", adaptive);
    doc.set_int("adaptive_max_iters", adaptive_max_iters);
    doc.set_int("attacker_epochs", attacker_epochs);
    doc.set_int_list("malicious_validator_ids", malicious_validator_ids);
    doc.set_int("data.num_classes", num_classes);
    doc.set_int("data.dim", feature_dim);
    doc.set_int("data.samples_per_class", samples_per_class);
    doc.set_double("data.cluster_spread", cluster_spread);
    doc.set_int_list("model.hidden_dims", hidden_dims);
    doc.set_double("split.client_share", client_share);
    doc.set_double("partition.alpha", dirichlet_alpha);
    doc.set_int("fl.total_clients", fl.total_clients);
    doc.set_int("fl.contributors_per_round", fl.contributors_per_round);
    doc.set_double("fl.global_lr", fl.global_lr);
    doc.set_int("train.epochs", fl.train_params.epochs);
    doc.set_double("train.learning_rate", fl.train_params.learning_rate);
    doc.set_int("train.batch_size", fl.train_params.batch_size);
    doc.set_int("defense.lookback", defense.lookback);
    doc.set_int("defense.quorum", defense.quorum);
    doc.set_int("defense.validators_per_round", defense.validators_per_round);
    doc.set("defense.mode", mode_name(defense.mode));
    doc.set("backdoor.mode", backdoor_mode_name(backdoor.mode));
    doc.set_int("backdoor.source_class", backdoor.source_class);
    doc.set_int("backdoor.target_class", backdoor.target_class);
    doc.set_int("backdoor.trigger_coord", backdoor.trigger.coord);
    doc.set_double("backdoor.trigger_threshold", backdoor.trigger.threshold);
    doc.set_double("backdoor.blend_ratio", backdoor.blend_ratio);
    doc.set_int("stabilize.window", stabilize.window);
    doc.set_double("stabilize.min_improvement", stabilize.min_improvement);
    doc.set_int("stabilize.max_rounds", stabilize.max_rounds);
    return doc;
}

ExperimentConfig ExperimentConfig::from_kv(const KvDoc& doc) {
    ExperimentConfig c;
    c.master_seed = doc.get_u64("master_seed", c.master_seed);
    c.scenario = scenario_from(doc.get_string("scenario", scenario_name(c.scenario)));
    c.end_round = static_cast<int>(doc.get_int("end_round", c.end_round));
    c.defense_start_round =
        static_cast<int>(doc.get_int("defense_start_round", c.defense_start_round));
    c.poison_rounds = doc.get_int_list("poison_rounds", c.poison_rounds);
    c.repetitions = static_cast<int>(doc.get_int("repetitions", c.repetitions));
    c.adaptive = doc.get_bool("adaptive", c.adaptive);
    c.adaptive_max_iters = static_cast<int>(doc.get_int("adaptive_max_iters", c.adaptive_max_iters));
    c.attacker_epochs = static_cast<int>(doc.get_int("attacker_epochs", c.attacker_epochs));
    c.malicious_validator_ids =
        doc.get_int_list("malicious_validator_ids", c.malicious_validator_ids);
    c.num_classes = static_cast<int>(doc.get_int("data.num_classes", c.num_classes));
    c.feature_dim = static_cast<int>(doc.get_int("data.dim", c.feature_dim));
    c.samples_per_class =
        static_cast<int>(doc.get_int("data.samples_per_class", c.samples_per_class));
    c.cluster_spread = doc.get_double("data.cluster_spread", c.cluster_spread);
    c.hidden_dims = doc.get_int_list("model.hidden_dims", c.hidden_dims);
    c.client_share = doc.get_double("split.client_share", c.client_share);
    c.dirichlet_alpha = doc.get_double("partition.alpha", c.dirichlet_alpha);
    c.fl.total_clients = static_cast<int>(doc.get_int("fl.total_clients", c.fl.total_clients));
    c.fl.contributors_per_round =
        static_cast<int>(doc.get_int("fl.contributors_per_round", c.fl.contributors_per_round));
    c.fl.global_lr = doc.get_double("fl.global_lr", c.fl.global_lr);
    c.fl.train_params.epochs =
        static_cast<int>(doc.get_int("train.epochs", c.fl.train_params.epochs));
    c.fl.train_params.learning_rate =
        doc.get_double("train.learning_rate", c.fl.train_params.learning_rate);
    c.fl.train_params.batch_size =
        static_cast<int>(doc.get_int("train.batch_size", c.fl.train_params.batch_size));
    c.defense.lookback = static_cast<int>(doc.get_int("defense.lookback", c.defense.lookback));
    c.defense.quorum = static_cast<int>(doc.get_int("defense.quorum", c.defense.quorum));
    c.defense.validators_per_round = static_cast<int>(
        doc.get_int("defense.validators_per_round", c.defense.validators_per_round));
    c.defense.mode = mode_from(doc.get_string("defense.mode", mode_name(c.defense.mode)));
    c.backdoor.mode =
        backdoor_mode_from(doc.get_string("backdoor.mode", backdoor_mode_name(c.backdoor.mode)));
    c.backdoor.source_class =
        static_cast<int>(doc.get_int("backdoor.source_class", c.backdoor.source_class));
    c.backdoor.target_class =
        static_cast<int>(doc.get_int("backdoor.target_class", c.backdoor.target_class));
    c.backdoor.trigger.coord =
        static_cast<int>(doc.get_int("backdoor.trigger_coord", c.backdoor.trigger.coord));
    c.backdoor.trigger.threshold =
        doc.get_double("backdoor.trigger_threshold", c.backdoor.trigger.threshold);
    c.backdoor.blend_ratio = doc.get_double("backdoor.blend_ratio", c.backdoor.blend_ratio);
    c.stabilize.window = static_cast<int>(doc.get_int("stabilize.window", c.stabilize.window));
    c.stabilize.min_improvement =
        doc.get_double("stabilize.min_improvement", c.stabilize.min_improvement);
    c.stabilize.max_rounds =
        static_cast<int>(doc.get_int("stabilize.max_rounds", c.stabilize.max_rounds));
    return c;
}

void ExperimentConfig::check_valid() const {
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (end_round < 1) throw ConfigError("end_round must be >= 1");
    if (defense_start_round < 1) throw ConfigError("defense_start_round must be >= 1");
    for (int r : poison_rounds)
        if (r < 1 || r > end_round)
            throw ConfigError("poison round " + std::to_string(r) + " outside [1, end_round]");
    if (num_classes < 2) throw ConfigError("data.num_classes must be >= 2");
    if (feature_dim < 1 || samples_per_class < 1)
        throw ConfigError("data dimensions must be positive");
    if (!(cluster_spread > 0.0)) throw ConfigError("data.cluster_spread must be positive");
    if (!(client_share > 0.0 && client_share <= 1.0))
        throw ConfigError("split.client_share must be in (0,1]");
    if (!(dirichlet_alpha > 0.0)) throw ConfigError("partition.alpha must be positive");
    if (fl.total_clients < 1) throw ConfigError("fl.total_clients must be >= 1");
    if (fl.contributors_per_round < 1 || fl.contributors_per_round > fl.total_clients)
        throw ConfigError("fl.contributors_per_round out of range");
    if (!(fl.global_lr > 0.0)) throw ConfigError("fl.global_lr must be positive");
    if (fl.train_params.epochs < 1 || fl.train_params.batch_size < 1)
        throw ConfigError("train parameters must be positive");
    if (adaptive_max_iters < 0) throw ConfigError("adaptive_max_iters must be >= 0");
    if (attacker_epochs < 1) throw ConfigError("attacker_epochs must be >= 1");
    defense.check_valid();
    if (defense.validators_per_round != fl.contributors_per_round)
        throw ConfigError("validators_per_round must equal contributors_per_round "
                          "(validators are the round's contributors)");
    backdoor.check_valid(num_classes, feature_dim);
    if (stabilize.window < 1 || stabilize.max_rounds < stabilize.window)
        throw ConfigError("stabilize window/max_rounds inconsistent");
}

SingleRunResult run_single(const ExperimentConfig& config, std::uint64_t seed) {
    config.check_valid();
    SingleRunResult result;

    auto [train, test] = make_synthetic(config.num_classes, config.feature_dim,
                                        config.samples_per_class, config.cluster_spread,
                                        mix_seed({seed, kDataTag}));
    auto [client_pool, server_set] =
        split_clients_server(train, SplitConfig{config.client_share, mix_seed({seed, kSplitTag})});
    const std::vector<LabeledDataset> shards = dirichlet_partition(
        client_pool,
        PartitionConfig{config.fl.total_clients, config.dirichlet_alpha, mix_seed({seed, kPartTag})});

    const Arch arch{config.feature_dim, config.hidden_dims, config.num_classes};
    FlConfig fl = config.fl;
    fl.train_params.seed = mix_seed({seed, kTrainTag});

    GlobalState state;
    state.current_model = init_model(arch, mix_seed({seed, kInitTag}));
    state.accepted_history.push_back(state.current_model);

    const LabeledDataset backdoor_eval = backdoor_eval_set(test, config.backdoor);
    const int attacker_id = pick_attacker(shards, config.backdoor);
    const AttackerState attacker{attacker_id, shards[attacker_id], config.backdoor};
    const DefenseKnowledge knowledge{config.defense.lookback, config.defense.quorum};

    // contributors are drawn among clients that hold data; selected
    // validators coincide with them, so the empty-shard accept default
    // only matters for direct library use
    std::vector<int> eligible_ids;
    for (int i = 0; i < config.fl.total_clients; ++i)
        if (!shards[i].empty()) eligible_ids.push_back(i);
    if (static_cast<int>(eligible_ids.size()) < fl.contributors_per_round)
        throw ConfigError("run_single: fewer non-empty shards than contributors");

    const auto run_clean_round = [&]() {
        Rng select_stream(mix_seed({seed, kSelectTag, static_cast<std::uint64_t>(state.round)}));
        const std::vector<int> selected =
            select_clients(eligible_ids, fl.contributors_per_round, select_stream);
        auto [candidate, meta] = run_training_round(state, fl, shards, selected, nullptr);
        state.accepted_history.push_back(candidate);
        state.current_model = std::move(candidate);
        state.round += 1;
    };

    // warm-up until the test accuracy plateaus; that round becomes round 1
    if (config.scenario == Scenario::Stable) {
        std::vector<double> acc_history;
        for (int s = 0; s < config.stabilize.max_rounds; ++s) {
            run_clean_round();
            acc_history.push_back(empirical_accuracy(state.current_model, test));
            result.stabilization_rounds += 1;
            const int w = config.stabilize.window;
            if (s >= w &&
                acc_history[s] - acc_history[s - w] < config.stabilize.min_improvement)
                break;
        }
    }

    for (int round = 1; round <= config.end_round; ++round) {
        Rng select_stream(mix_seed({seed, kSelectTag, static_cast<std::uint64_t>(state.round)}));
        std::vector<int> selected =
            select_clients(eligible_ids, fl.contributors_per_round, select_stream);

        const bool scheduled = std::find(config.poison_rounds.begin(), config.poison_rounds.end(),
                                         round) != config.poison_rounds.end();
        bool was_poisoned = false;
        bool adaptive_submitted = false;
        MaliciousHook hook;

        if (scheduled) {
            // the attacker always manages to contribute in its scheduled round
            if (std::find(selected.begin(), selected.end(), attacker_id) == selected.end())
                selected.back() = attacker_id;

            TrainParams attack_tp = fl.train_params;
            attack_tp.epochs = config.attacker_epochs;
            attack_tp.seed = mix_seed({seed, kAttackTag, static_cast<std::uint64_t>(round)});

            std::optional<Model> target;
            if (config.adaptive) {
                target = adaptive_craft(state.current_model, state.accepted_history, attacker,
                                        knowledge, attack_tp, config.adaptive_max_iters);
                if (target) {
                    adaptive_submitted = true;
                    result.adaptive_submitted += 1;
                } else {
                    result.attacker_gave_up += 1;
                }
            } else {
                target = craft_backdoor_model(state.current_model, attacker, attack_tp);
            }
            if (target) {
                was_poisoned = true;
                Model update = model_replacement_update(state.current_model, *target,
                                                        fl.global_lr, fl.total_clients);
                hook = [attacker_id, update = std::move(update)](
                           int id, const Model&) -> std::optional<Model> {
                    if (id == attacker_id) return update;
                    return std::nullopt;
                };
            }
        }

        auto [candidate, meta] = run_training_round(state, fl, shards, selected, hook);

        RoundRecord rec;
        rec.round = round;
        rec.was_poisoned = was_poisoned;

        const bool defense_active =
            round >= config.defense_start_round &&
            static_cast<int>(state.accepted_history.size()) >= config.defense.lookback + 1;
        if (!defense_active) {
            rec.decision = Decision::DefenseInactive;
            state.accepted_history.push_back(candidate);
            state.current_model = candidate;
        } else {
            std::vector<std::pair<int, const LabeledDataset*>> validators;
            for (int id : selected) validators.emplace_back(id, &shards[id]);
            std::set<int> overrides(config.malicious_validator_ids.begin(),
                                    config.malicious_validator_ids.end());
            const FeedbackResult fb = feedback_round(candidate, state, config.defense, validators,
                                                     &server_set, overrides);
            rec.decision = fb.decision;
            rec.votes = fb.votes;
            if (adaptive_submitted && fb.decision == Decision::Reject)
                result.adaptive_rejected += 1;
        }

        rec.main_accuracy = empirical_accuracy(state.current_model, test);
        rec.backdoor_accuracy =
            backdoor_eval.empty()
                ? 0.0
                : backdoor_accuracy(state.current_model, backdoor_eval, config.backdoor.target_class);
        state.round += 1;
        state.round_log.push_back(rec);
        result.records.push_back(std::move(rec));
    }
    return result;
}

Report run_experiment(const ExperimentConfig& config) {
    config.check_valid();
    Report report;
    report.config_echo = config.to_kv();

    for (int rep = 0; rep < config.repetitions; ++rep) {
        const std::uint64_t rep_seed =
            mix_seed({config.master_seed, static_cast<std::uint64_t>(rep)});
        SingleRunResult run = run_single(config, rep_seed);

        int clean_active = 0, clean_rejected = 0, poisoned_active = 0, poisoned_accepted = 0;
        for (const RoundRecord& rec : run.records) {
            if (rec.decision == Decision::DefenseInactive) continue;
            if (rec.was_poisoned) {
                ++poisoned_active;
                if (rec.decision == Decision::Accept) ++poisoned_accepted;
            } else {
                ++clean_active;
                if (rec.decision == Decision::Reject) ++clean_rejected;
            }
        }
        report.fp_per_rep.push_back(
            clean_active ? std::optional<double>(static_cast<double>(clean_rejected) / clean_active)
                         : std::nullopt);
        report.fn_per_rep.push_back(
            poisoned_active
                ? std::optional<double>(static_cast<double>(poisoned_accepted) / poisoned_active)
                : std::nullopt);
        report.runs.push_back(std::move(run.records));
    }

    report.fp_rate = aggregate_rates(report.fp_per_rep);
    report.fn_rate = aggregate_rates(report.fn_per_rep);
    return report;
}

std::vector<Report> sweep(const ExperimentConfig& base, const SweepGrid& grid) {
    const std::vector<int> lookbacks =
        grid.lookbacks.empty() ? std::vector<int>{base.defense.lookback} : grid.lookbacks;
    const std::vector<int> quorums =
        grid.quorums.empty() ? std::vector<int>{base.defense.quorum} : grid.quorums;
    const std::vector<double> shares =
        grid.client_shares.empty() ? std::vector<double>{base.client_share} : grid.client_shares;
    if (lookbacks.empty() || quorums.empty() || shares.empty())
        throw ConfigError("sweep: empty grid");

    std::vector<Report> reports;
    for (int lookback : lookbacks)
        for (int quorum : quorums)
            for (double share : shares) {
                ExperimentConfig point = base;
                point.defense.lookback = lookback;
                point.defense.quorum = quorum;
                point.client_share = share;
                reports.push_back(run_experiment(point));
            }
    return reports;
}

double comm_overhead(double model_bytes, int lookback, double compression_factor) {
    if (!(model_bytes > 0.0) || lookback < 0 || !(compression_factor > 0.0))
        throw InputError("comm_overhead: inputs must be positive");
    return static_cast<double>(lookback + 1) * model_bytes / compression_factor;
}

}  // namespace fedsim

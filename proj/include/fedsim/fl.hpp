#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/ml.hpp"
#include "fedsim/record.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

struct FlConfig {
    int total_clients = 100;        // N
    int contributors_per_round = 10;  // n
    double global_lr = 10.0;        // lambda
    TrainParams train_params;
    int rounds = 50;
};

/// Server-side view of the training run. current_model always equals the
/// last entry of accepted_history.
struct GlobalState {
    int round = 0;
    Model current_model;
    std::vector<Model> accepted_history;
    std::vector<RoundRecord> round_log;
};

/// Ground-truth bookkeeping for one round. Only the harness may read this;
/// the defense sees nothing but the aggregated candidate.
struct ContributionsMeta {
    std::vector<int> malicious_ids;
};

/// Returns the local model a malicious client submits, or nullopt when the
/// client behaves honestly this round.
using MaliciousHook = std::function<std::optional<Model>(int client_id, const Model& global)>;

/// n distinct ids drawn uniformly without replacement.
std::vector<int> select_clients(const std::vector<int>& client_ids, int n, Rng& stream);

/// G' = G + (lambda/N) * sum_i (L_i - G), elementwise.
Model aggregate(const Model& global, const std::vector<Model>& locals, double lambda,
                int total_clients);

/// One training round: honest clients train locally on their shards
/// (empty-shard clients submit a zero delta), the hook may substitute a
/// malicious model, and only the aggregate leaves this function.
std::pair<Model, ContributionsMeta> run_training_round(const GlobalState& state,
                                                       const FlConfig& config,
                                                       const std::vector<LabeledDataset>& shards,
                                                       const std::vector<int>& selected_ids,
                                                       const MaliciousHook& malicious_hook);

}  // namespace fedsim

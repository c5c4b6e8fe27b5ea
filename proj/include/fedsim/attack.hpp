#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fedsim/backdoor.hpp"
#include "fedsim/dataset.hpp"
#include "fedsim/ml.hpp"
#include "fedsim/model.hpp"

namespace fedsim {

/// Everything the adversary controls: one client, its private data, and
/// the backdoor it is trying to plant.
struct AttackerState {
    int client_id = 0;
    LabeledDataset attacker_dataset;
    BackdoorSpec spec;
};

/// What the adversary knows about the deployed defense.
struct DefenseKnowledge {
    int lookback = 20;
    int quorum = 5;
};

/// Fraction of the backdoor instances the model assigns to the target label.
double backdoor_accuracy(const Model& model, const LabeledDataset& backdoor_set,
                         int target_label);

/// The backdoor-affected rows of a dataset, with their original labels.
/// Used as the held-out evaluation set for backdoor_accuracy.
LabeledDataset backdoor_eval_set(const LabeledDataset& data, const BackdoorSpec& spec);

/// Trains from the global model on a blend of the attacker's clean samples
/// (once each) and its affected samples relabeled to the target, replicated
/// until the poisoned fraction reaches blend_ratio. Without any affected
/// samples this degenerates to honest local training.
Model craft_backdoor_model(const Model& global, const AttackerState& attacker,
                           const TrainParams& params);

/// L_m = G + (N/lambda) * (X - G): submitting this update makes the
/// aggregate equal X when every other contributor submits a zero delta.
Model model_replacement_update(const Model& global, const Model& target_model, double lambda,
                               int total_clients);

/// Defense-aware crafting: starting from the full backdoor model, simulate
/// the validation locally on the attacker's own data with its backdoor
/// samples relabeled to the target (so only collateral damage counts);
/// while that check rejects, halve the interpolation toward the global
/// model and add five clean fine-tuning epochs, up to max_iters attempts.
/// Returns the first target model whose attacker-side check accepts (a
/// history shorter than lookback+1 accepts by default), or nullopt when
/// the attacker gives up.
std::optional<Model> adaptive_craft(const Model& global, const std::vector<Model>& history,
                                    const AttackerState& attacker,
                                    const DefenseKnowledge& defense,
                                    const TrainParams& params, int max_iters);

}  // namespace fedsim

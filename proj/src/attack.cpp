#include "fedsim/attack.hpp"

#include <cmath>

#include "fedsim/data_gen.hpp"
#include "fedsim/defense.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

double backdoor_accuracy(const Model& model, const LabeledDataset& backdoor_set,
                         int target_label) {
    if (backdoor_set.empty()) throw InputError("backdoor_accuracy: empty backdoor set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < backdoor_set.size(); ++i)
        if (predict(model, backdoor_set.row(i)) == target_label) ++hits;
    return static_cast<double>(hits) / static_cast<double>(backdoor_set.size());
}

LabeledDataset backdoor_eval_set(const LabeledDataset& data, const BackdoorSpec& spec) {
    spec.check_valid(data.num_classes, data.dim);
    LabeledDataset out;
    out.dim = data.dim;
    out.num_classes = data.num_classes;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (spec.affects(data.row(i), data.labels[i])) out.push_back(data.row(i), data.labels[i]);
    return out;
}

Model craft_backdoor_model(const Model& global, const AttackerState& attacker,
                           const TrainParams& params) {
    const LabeledDataset& own = attacker.attacker_dataset;
    if (own.empty()) throw InputError("craft_backdoor_model: attacker dataset is empty");
    attacker.spec.check_valid(own.num_classes, own.dim);

    LabeledDataset poisoned_pool = backdoor_eval_set(own, attacker.spec);
    for (int& y : poisoned_pool.labels) y = attacker.spec.target_class;
    if (poisoned_pool.empty()) return train_local(global, own, params);

    // blend: every clean sample once, poisoned samples replicated until the
    // poisoned fraction reaches blend_ratio
    LabeledDataset blend;
    blend.dim = own.dim;
    blend.num_classes = own.num_classes;
    std::size_t clean_count = 0;
    if (attacker.spec.blend_ratio < 1.0) {
        for (std::size_t i = 0; i < own.size(); ++i)
            if (!attacker.spec.affects(own.row(i), own.labels[i])) {
                blend.push_back(own.row(i), own.labels[i]);
                ++clean_count;
            }
    }
    const double ratio = attacker.spec.blend_ratio;
    const int replicas =
        clean_count == 0
            ? 1
            : std::max(1, static_cast<int>(std::lround(
                              ratio * clean_count /
                              ((1.0 - ratio) * static_cast<double>(poisoned_pool.size())))));
    for (int r = 0; r < replicas; ++r)
        for (std::size_t i = 0; i < poisoned_pool.size(); ++i)
            blend.push_back(poisoned_pool.row(i), poisoned_pool.labels[i]);
    return train_local(global, blend, params);
}

Model model_replacement_update(const Model& global, const Model& target_model, double lambda,
                               int total_clients) {
    require_same_arch(global, target_model, "model_replacement_update");
    if (!(lambda > 0.0)) throw InputError("model_replacement_update: lambda must be positive");
    const double boost = static_cast<double>(total_clients) / lambda;
    Model update = global;
    for (std::size_t j = 0; j < update.params.size(); ++j)
        update.params[j] += boost * (target_model.params[j] - global.params[j]);
    return update;
}

std::optional<Model> adaptive_craft(const Model& global, const std::vector<Model>& history,
                                    const AttackerState& attacker,
                                    const DefenseKnowledge& defense,
                                    const TrainParams& params, int max_iters) {
    // The attacker simulates the defense through its poisoned view: its
    // backdoor samples carry the target label, so only collateral damage
    // to its clean data can trip the check. Misclassifying anything beyond
    // the backdoor set is what it shrinks away.
    const LabeledDataset own_view = poison_dataset(attacker.attacker_dataset, attacker.spec);
    const auto passes_own_check = [&](const Model& candidate) {
        if (static_cast<int>(history.size()) < defense.lookback + 1) return true;
        const std::span<const Model> window{
            history.data() + history.size() - (defense.lookback + 1),
            static_cast<std::size_t>(defense.lookback + 1)};
        return validate(candidate, window, own_view).vote == 0;
    };

    Model crafted = craft_backdoor_model(global, attacker, params);
    double gamma = 1.0;
    for (int iter = 0; iter < max_iters; ++iter) {
        if (iter > 0) {
            // previous attempt was flagged: tame the update
            gamma *= 0.5;
            TrainParams fine = params;
            fine.epochs = 5;
            fine.seed = mix_seed({params.seed, 0x66696e65ull /*"fine"*/,
                                  static_cast<std::uint64_t>(iter)});
            crafted = train_local(crafted, attacker.attacker_dataset, fine);
        }
        Model candidate = gamma == 1.0 ? crafted : global + scale(crafted - global, gamma);
        if (passes_own_check(candidate)) return candidate;
    }
    return std::nullopt;
}

}  // namespace fedsim

#include "fedsim/fl.hpp"

namespace fedsim {

std::vector<int> select_clients(const std::vector<int>& client_ids, int n, Rng& stream) {
    if (n > static_cast<int>(client_ids.size()))
        throw ConfigError("select_clients: n exceeds the client pool");
    std::vector<int> picked =
        stream.sample_without_replacement(static_cast<int>(client_ids.size()), n);
    std::vector<int> out;
    out.reserve(n);
    for (int p : picked) out.push_back(client_ids[p]);
    return out;
}

Model aggregate(const Model& global, const std::vector<Model>& locals, double lambda,
                int total_clients) {
    if (locals.empty()) throw InputError("aggregate: no local models");
    for (const Model& l : locals) require_same_arch(global, l, "aggregate");

    Model out = global;
    const double weight = lambda / static_cast<double>(total_clients);
    for (std::size_t j = 0; j < out.params.size(); ++j) {
        double delta_sum = 0.0;
        for (const Model& l : locals) delta_sum += l.params[j] - global.params[j];
        out.params[j] += weight * delta_sum;
    }
    return out;
}

std::pair<Model, ContributionsMeta> run_training_round(const GlobalState& state,
                                                       const FlConfig& config,
                                                       const std::vector<LabeledDataset>& shards,
                                                       const std::vector<int>& selected_ids,
                                                       const MaliciousHook& malicious_hook) {
    const Model& global = state.current_model;
    std::vector<Model> locals;
    locals.reserve(selected_ids.size());
    ContributionsMeta meta;

    for (int id : selected_ids) {
        if (id < 0 || id >= static_cast<int>(shards.size()))
            throw InputError("run_training_round: selected id has no shard");
        if (malicious_hook) {
            if (std::optional<Model> crafted = malicious_hook(id, global)) {
                require_same_arch(global, *crafted, "run_training_round");
                locals.push_back(std::move(*crafted));
                meta.malicious_ids.push_back(id);
                continue;
            }
        }
        if (shards[id].empty()) {
            locals.push_back(global);  // zero delta
            continue;
        }
        TrainParams tp = config.train_params;
        tp.seed = mix_seed({config.train_params.seed, static_cast<std::uint64_t>(state.round),
                            static_cast<std::uint64_t>(id)});
        locals.push_back(train_local(global, shards[id], tp));
    }

    Model candidate = aggregate(global, locals, config.global_lr, config.total_clients);
    return {std::move(candidate), std::move(meta)};
}

}  // namespace fedsim

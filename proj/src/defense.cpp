#include "fedsim/defense.hpp"

#include <cmath>

#include "fedsim/lof.hpp"

namespace fedsim {

VariationVector variation_vector(const Model& f_prev, const Model& f_curr,
                                 const LabeledDataset& data) {
    require_same_arch(f_prev, f_curr, "variation_vector");
    const ErrorProfile prev = per_class_errors(f_prev, data);
    const ErrorProfile curr = per_class_errors(f_curr, data);
    VariationVector v;
    const std::size_t classes = prev.source_errors.size();
    v.source_deltas.resize(classes);
    v.target_deltas.resize(classes);
    for (std::size_t y = 0; y < classes; ++y) {
        v.source_deltas[y] = prev.source_errors[y] - curr.source_errors[y];
        v.target_deltas[y] = prev.target_errors[y] - curr.target_errors[y];
    }
    return v;
}

std::pair<Verdict, ValidateTrace> validate_traced(const Model& current,
                                                  std::span<const Model> history,
                                                  const LabeledDataset& data) {
    const int lookback = static_cast<int>(history.size()) - 1;
    if (lookback < 4)
        throw ConfigError("validate: history must hold at least 5 models (lookback >= 4)");
    if (data.empty()) throw InputError("validate: empty dataset");

    // v[i] is the variation between history models i-1 and i (1-based,
    // v[0] unused); v_new compares the last accepted model to the candidate.
    std::vector<std::vector<double>> v(lookback + 1);
    for (int i = 1; i <= lookback; ++i)
        v[i] = variation_vector(history[i - 1], history[i], data).flatten();
    const std::vector<double> v_new =
        variation_vector(history[lookback], current, data).flatten();

    ValidateTrace trace;
    trace.h = static_cast<int>(std::ceil(3.0 * lookback / 4.0));
    const int window = trace.h - 1;  // reference-set size for every score
    trace.k = std::min((lookback + 1) / 2, window);

    auto reference_before = [&](int i) {
        std::vector<std::vector<double>> set;
        set.reserve(window);
        for (int j = i - window; j < i; ++j) set.push_back(v[j]);
        return set;
    };

    for (int i = trace.h; i <= lookback; ++i)
        trace.trusted_scores.push_back(lof_score(v[i], reference_before(i), trace.k));
    trace.new_score = lof_score(v_new, reference_before(lookback + 1), trace.k);

    double sum = 0.0;
    for (double phi : trace.trusted_scores) sum += phi;
    trace.threshold = sum / static_cast<double>(trace.trusted_scores.size());

    Verdict verdict;
    verdict.lof_value = trace.new_score;
    verdict.threshold = trace.threshold;
    verdict.vote = trace.new_score > trace.threshold ? 1 : 0;
    return {verdict, trace};
}

Verdict validate(const Model& current, std::span<const Model> history,
                 const LabeledDataset& data) {
    return validate_traced(current, history, data).first;
}

int quorum_threshold(const QuorumParams& params) {
    params.check_valid();
    const double raw = params.rho * static_cast<double>(params.n - params.n_malicious);
    int q = static_cast<int>(std::ceil(raw - 1e-9));
    if (q < 1) q = 1;
    if (q > params.n) q = params.n;
    return q;
}

int max_tolerated_malicious(int n, double rho) {
    if (n < 1) throw ConfigError("max_tolerated_malicious: n must be positive");
    if (rho < 0.0 || rho > 1.0)
        throw ConfigError("max_tolerated_malicious: rho must be in [0,1]");
    const double bound = (1.0 - rho) * static_cast<double>(n) / (2.0 - rho);
    // largest integer strictly below the bound
    const int m = static_cast<int>(std::floor(bound - 1e-9));
    return m < 0 ? 0 : m;
}

FeedbackResult feedback_round(const Model& candidate, GlobalState& state,
                              const DefenseConfig& config,
                              const std::vector<std::pair<int, const LabeledDataset*>>& validators,
                              const LabeledDataset* server_set,
                              const std::set<int>& vote_overrides) {
    config.check_valid();
    const int lookback = config.lookback;
    if (static_cast<int>(state.accepted_history.size()) < lookback + 1)
        throw ConfigError("feedback_round: history shorter than lookback + 1");

    const std::span<const Model> window{
        state.accepted_history.data() + state.accepted_history.size() - (lookback + 1),
        static_cast<std::size_t>(lookback + 1)};

    FeedbackResult result;
    if (config.mode != DefenseMode::ServerOnly) {
        for (const auto& [id, shard] : validators) {
            int vote = 0;  // missing or empty shard: accept by default
            if (shard != nullptr && !shard->empty())
                vote = validate(candidate, window, *shard).vote;
            if (vote_overrides.count(id)) vote = 1 - vote;
            result.votes.push_back(vote);
        }
    }
    if (config.mode != DefenseMode::ClientsOnly) {
        if (server_set == nullptr || server_set->empty())
            throw InputError("feedback_round: server validation set required in this mode");
        result.votes.push_back(validate(candidate, window, *server_set).vote);
    }

    int reject_votes = 0;
    for (int v : result.votes) reject_votes += v;

    bool reject;
    if (config.mode == DefenseMode::ServerOnly)
        reject = result.votes.back() == 1;
    else
        reject = reject_votes >= config.quorum;

    if (reject) {
        result.decision = Decision::Reject;  // candidate discarded, model unchanged
    } else {
        result.decision = Decision::Accept;
        state.accepted_history.push_back(candidate);
        state.current_model = candidate;
    }
    return result;
}

}  // namespace fedsim

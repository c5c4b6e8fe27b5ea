#pragma once

#include <set>
#include <span>
#include <utility>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/fl.hpp"
#include "fedsim/ml.hpp"
#include "fedsim/model.hpp"
#include "fedsim/record.hpp"

namespace fedsim {

/// Per-class changes in source- and target-focused error rates between two
/// models, measured on the same dataset (previous minus current).
struct VariationVector {
    std::vector<double> source_deltas;
    std::vector<double> target_deltas;

    /// [source_deltas, target_deltas] as one point of dimension 2*|Y|.
    std::vector<double> flatten() const {
        std::vector<double> out = source_deltas;
        out.insert(out.end(), target_deltas.begin(), target_deltas.end());
        return out;
    }
};

enum class DefenseMode { ServerOnly, ClientsOnly, Combined };

struct DefenseConfig {
    int lookback = 20;             // l: window of previously accepted models
    int quorum = 5;                // q: reject votes needed to discard
    int validators_per_round = 10;
    DefenseMode mode = DefenseMode::Combined;

    void check_valid() const {
        if (lookback < 4) throw ConfigError("DefenseConfig: lookback must be >= 4");
        const int max_votes =
            validators_per_round + (mode == DefenseMode::Combined ? 1 : 0);
        if (mode != DefenseMode::ServerOnly && (quorum < 1 || quorum > max_votes))
            throw ConfigError("DefenseConfig: quorum out of range");
        if (validators_per_round < 1 && mode != DefenseMode::ServerOnly)
            throw ConfigError("DefenseConfig: need at least one validator");
    }
};

struct QuorumParams {
    int n = 10;           // validators per round
    int n_malicious = 0;  // tolerated malicious validators, < n/2
    double rho = 0.5;     // fraction of honest validators judging correctly

    void check_valid() const {
        if (n < 1) throw ConfigError("QuorumParams: n must be positive");
        if (n_malicious < 0 || 2 * n_malicious >= n)
            throw ConfigError("QuorumParams: must have n_malicious < n/2");
        if (rho < 0.0 || rho > 1.0) throw ConfigError("QuorumParams: rho must be in [0,1]");
    }
};

/// One validator's judgment: vote is 1 (reject) exactly when the new
/// variation's outlier factor exceeds the threshold.
struct Verdict {
    int vote = 0;
    double lof_value = 0.0;  // outlier factor of the new variation
    double threshold = 0.0;  // mean of the trusted outlier factors
};

/// Intermediate values of validate, for tests and diagnostics.
struct ValidateTrace {
    std::vector<double> trusted_scores;  // phi_h .. phi_l
    double new_score = 0.0;
    double threshold = 0.0;
    int k = 0;
    int h = 0;
};

VariationVector variation_vector(const Model& f_prev, const Model& f_curr,
                                 const LabeledDataset& data);

/// Scores the candidate's error variation against the variations of the
/// last lookback+1 accepted models (oldest first) on one dataset. With
/// l = |history|-1: k = ceil(l/2), h = ceil(3l/4); each variation v_i for
/// i in [h, l] is LOF-scored against its h-1 predecessors, the candidate's
/// variation against the last h-1, and the vote is reject exactly when the
/// candidate's score strictly exceeds the mean trusted score.
Verdict validate(const Model& current, std::span<const Model> history,
                 const LabeledDataset& data);

/// validate plus its intermediate scores.
std::pair<Verdict, ValidateTrace> validate_traced(const Model& current,
                                                  std::span<const Model> history,
                                                  const LabeledDataset& data);

/// q = ceil(rho * (n - n_malicious)), clamped to [1, n].
int quorum_threshold(const QuorumParams& params);

/// Largest integer strictly below (1 - rho) * n / (2 - rho), at least 0.
int max_tolerated_malicious(int n, double rho);

struct FeedbackResult {
    Decision decision = Decision::Accept;
    std::vector<int> votes;  // post-override; server vote last in combined mode
};

/// One feedback-loop round over an aggregated candidate. Each validator
/// votes via validate on its own shard (empty shards default to accept);
/// vote_overrides flips the listed validators' votes; in combined mode the
/// server adds one vote computed on server_set, and in server-only mode
/// that single vote decides. Reject iff the tally reaches the quorum; the
/// state is advanced accordingly (append on accept, discard on reject).
FeedbackResult feedback_round(const Model& candidate, GlobalState& state,
                              const DefenseConfig& config,
                              const std::vector<std::pair<int, const LabeledDataset*>>& validators,
                              const LabeledDataset* server_set,
                              const std::set<int>& vote_overrides);

}  // namespace fedsim

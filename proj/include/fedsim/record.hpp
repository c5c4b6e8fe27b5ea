#pragma once

#include <string>
#include <vector>

#include "fedsim/errors.hpp"

namespace fedsim {

enum class Decision { Accept, Reject, DefenseInactive };

inline const char* to_string(Decision d) {
    switch (d) {
        case Decision::Accept: return "Accept";
        case Decision::Reject: return "Reject";
        case Decision::DefenseInactive: return "DefenseInactive";
    }
    return "?";
}

inline Decision decision_from_string(const std::string& s) {
    if (s == "Accept") return Decision::Accept;
    if (s == "Reject") return Decision::Reject;
    if (s == "DefenseInactive") return Decision::DefenseInactive;
    throw InputError("unknown decision: " + s);
}

/// Outcome of one training round. was_poisoned is ground truth from the
/// schedule, never derived from the defense's decision.
struct RoundRecord {
    int round = 0;
    bool was_poisoned = false;
    Decision decision = Decision::DefenseInactive;
    std::vector<int> votes;  // per-validator verdicts, server last in combined mode
    double main_accuracy = 0.0;
    double backdoor_accuracy = 0.0;

    int reject_votes() const {
        int c = 0;
        for (int v : votes) c += v;
        return c;
    }
};

}  // namespace fedsim

#pragma once

#include <span>

#include "fedsim/errors.hpp"

namespace fedsim {

/// Feature-level stand-in for a semantic trigger: fires when one
/// coordinate exceeds a threshold.
struct TriggerParams {
    int coord = 0;
    double threshold = 0.0;
};

/// What the adversary wants misclassified and how its training data is
/// blended. blend_ratio is the poisoned fraction of the attacker's batch.
struct BackdoorSpec {
    enum class Mode { LabelFlip, SemanticTrigger };

    Mode mode = Mode::LabelFlip;
    int source_class = -1;   // label-flip only
    TriggerParams trigger;   // semantic only
    int target_class = -1;
    double blend_ratio = 0.5;

    /// True when this sample belongs to the backdoor set.
    bool affects(std::span<const double> x, int label) const {
        if (mode == Mode::LabelFlip) return label == source_class;
        return x[trigger.coord] > trigger.threshold;
    }

    void check_valid(int num_classes, int dim) const {
        if (target_class < 0 || target_class >= num_classes)
            throw InputError("BackdoorSpec: target class out of range");
        if (mode == Mode::LabelFlip) {
            if (source_class < 0 || source_class >= num_classes)
                throw InputError("BackdoorSpec: source class out of range");
            if (source_class == target_class)
                throw InputError("BackdoorSpec: source and target must differ");
        } else {
            if (trigger.coord < 0 || trigger.coord >= dim)
                throw InputError("BackdoorSpec: trigger coordinate out of range");
        }
        if (!(blend_ratio > 0.0 && blend_ratio <= 1.0))
            throw InputError("BackdoorSpec: blend_ratio must be in (0,1]");
    }
};

}  // namespace fedsim

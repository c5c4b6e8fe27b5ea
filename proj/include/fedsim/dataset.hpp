#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fedsim/errors.hpp"

namespace fedsim {

/// Feature rows with integer class labels. Features are stored row-major
/// in one flat buffer.
struct LabeledDataset {
    std::vector<double> features;  // size() == labels.size() * dim
    std::vector<int> labels;
    int dim = 0;
    int num_classes = 0;

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }

    void push_back(std::span<const double> x, int label) {
        features.insert(features.end(), x.begin(), x.end());
        labels.push_back(label);
    }

    void check_valid() const {
        if (num_classes < 1 || dim < 1)
            throw InputError("LabeledDataset: dim and num_classes must be positive");
        if (features.size() != labels.size() * static_cast<std::size_t>(dim))
            throw InputError("LabeledDataset: feature buffer size does not match labels");
        for (int y : labels)
            if (y < 0 || y >= num_classes)
                throw InputError("LabeledDataset: label out of range");
    }
};

}  // namespace fedsim

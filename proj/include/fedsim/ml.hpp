#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/model.hpp"

namespace fedsim {

struct TrainParams {
    int epochs = 1;
    double learning_rate = 0.1;
    int batch_size = 32;
    std::uint64_t seed = 0;
};

/// Per-class error rates on a fixed dataset. source_errors[y] is the
/// fraction of all samples whose true class is y and are misclassified;
/// target_errors[y] is the fraction wrongly assigned to class y. Both
/// sum to the overall error.
struct ErrorProfile {
    std::vector<double> source_errors;
    std::vector<double> target_errors;
    double overall_error = 0.0;
};

/// Deterministic init: weights uniform in [-0.5, 0.5]/sqrt(fan_in) from a
/// stream derived from (seed, layer), biases zero.
Model init_model(const Arch& arch, std::uint64_t seed);

/// Raw class scores for one feature row.
std::vector<double> logits(const Model& model, std::span<const double> x);

/// Argmax class; ties break toward the lowest class index.
int predict(const Model& model, std::span<const double> x);

/// Mean cross-entropy over the dataset (max-subtracted softmax).
double dataset_loss(const Model& model, const LabeledDataset& data);

/// Analytic gradient of dataset_loss w.r.t. every parameter.
std::vector<double> loss_gradient(const Model& model, const LabeledDataset& data);

/// Minibatch SGD for `epochs` passes; each epoch reshuffles with the seeded
/// stream and keeps the last partial batch. Returns a new model.
Model train_local(const Model& model, const LabeledDataset& data, const TrainParams& params);

double empirical_accuracy(const Model& model, const LabeledDataset& data);

ErrorProfile per_class_errors(const Model& model, const LabeledDataset& data);

}  // namespace fedsim

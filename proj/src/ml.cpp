#include "fedsim/ml.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

// Offsets of each layer's weight and bias blocks in the flat vector.
struct Layout {
    std::vector<int> sizes;
    std::vector<std::size_t> weight_offset;
    std::vector<std::size_t> bias_offset;
    std::size_t total = 0;

    explicit Layout(const Arch& arch) : sizes(arch.layer_sizes()) {
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            weight_offset.push_back(total);
            total += static_cast<std::size_t>(sizes[l + 1]) * sizes[l];
            bias_offset.push_back(total);
            total += sizes[l + 1];
        }
    }

    std::size_t layer_count() const { return weight_offset.size(); }
};

// Forward pass keeping every activation (needed for backprop).
// activations[0] is the input; the last entry holds raw logits.
void forward(const Layout& lay, const std::vector<double>& params, std::span<const double> x,
             std::vector<std::vector<double>>& activations) {
    activations.resize(lay.layer_count() + 1);
    activations[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < lay.layer_count(); ++l) {
        const int in = lay.sizes[l];
        const int out = lay.sizes[l + 1];
        const double* w = params.data() + lay.weight_offset[l];
        const double* b = params.data() + lay.bias_offset[l];
        const std::vector<double>& a = activations[l];
        std::vector<double>& z = activations[l + 1];
        z.assign(out, 0.0);
        for (int o = 0; o < out; ++o) {
            double s = b[o];
            const double* wo = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) s += wo[i] * a[i];
            z[o] = s;
        }
        const bool is_last = (l + 1 == lay.layer_count());
        if (!is_last)
            for (double& v : z) v = std::tanh(v);
    }
}

// Softmax probabilities from logits, max-subtracted.
std::vector<double> softmax(const std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double denom = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        p[k] = std::exp(z[k] - zmax);
        denom += p[k];
    }
    for (double& v : p) v /= denom;
    return p;
}

// Accumulates the gradient of one sample's cross-entropy into grad.
void backward_sample(const Layout& lay, const std::vector<double>& params,
                     const std::vector<std::vector<double>>& activations, int label,
                     std::vector<double>& grad) {
    const std::size_t layers = lay.layer_count();
    std::vector<double> delta = softmax(activations[layers]);
    delta[label] -= 1.0;

    for (std::size_t l = layers; l-- > 0;) {
        const int in = lay.sizes[l];
        const int out = lay.sizes[l + 1];
        const std::vector<double>& a = activations[l];
        double* gw = grad.data() + lay.weight_offset[l];
        double* gb = grad.data() + lay.bias_offset[l];
        for (int o = 0; o < out; ++o) {
            gb[o] += delta[o];
            double* gwo = gw + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) gwo[i] += delta[o] * a[i];
        }
        if (l == 0) break;
        // delta for the previous (tanh) layer
        const double* w = params.data() + lay.weight_offset[l];
        std::vector<double> prev(in, 0.0);
        for (int o = 0; o < out; ++o) {
            const double* wo = w + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) prev[i] += wo[i] * delta[o];
        }
        for (int i = 0; i < in; ++i) prev[i] *= 1.0 - a[i] * a[i];
        delta = std::move(prev);
    }
}

void check_model_dataset(const Model& model, const LabeledDataset& data, const char* op) {
    if (data.empty()) throw InputError(std::string(op) + ": empty dataset");
    if (data.dim != model.arch.input_dim)
        throw InputError(std::string(op) + ": feature dim does not match model input");
    if (data.num_classes != model.arch.num_classes)
        throw InputError(std::string(op) + ": class counts disagree");
}

}  // namespace

Model init_model(const Arch& arch, std::uint64_t seed) {
    arch.check_valid();
    const Layout lay(arch);
    Model m;
    m.arch = arch;
    m.params.assign(lay.total, 0.0);
    for (std::size_t l = 0; l < lay.layer_count(); ++l) {
        Rng stream(mix_seed({seed, 0x696e6974ull /*"init"*/, static_cast<std::uint64_t>(l)}));
        const int in = lay.sizes[l];
        const int out = lay.sizes[l + 1];
        const double bound = 0.5 / std::sqrt(static_cast<double>(in));
        double* w = m.params.data() + lay.weight_offset[l];
        for (std::size_t i = 0; i < static_cast<std::size_t>(out) * in; ++i)
            w[i] = stream.uniform(-bound, bound);
        // biases stay zero
    }
    return m;
}

std::vector<double> logits(const Model& model, std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.arch.input_dim)
        throw InputError("logits: feature row length does not match model input");
    const Layout lay(model.arch);
    std::vector<std::vector<double>> acts;
    forward(lay, model.params, x, acts);
    return acts.back();
}

int predict(const Model& model, std::span<const double> x) {
    const std::vector<double> z = logits(model, x);
    int best = 0;
    for (std::size_t k = 1; k < z.size(); ++k)
        if (z[k] > z[best]) best = static_cast<int>(k);
    return best;
}

double dataset_loss(const Model& model, const LabeledDataset& data) {
    check_model_dataset(model, data, "dataset_loss");
    const Layout lay(model.arch);
    std::vector<std::vector<double>> acts;
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        forward(lay, model.params, data.row(i), acts);
        const std::vector<double>& z = acts.back();
        const double zmax = *std::max_element(z.begin(), z.end());
        double denom = 0.0;
        for (double v : z) denom += std::exp(v - zmax);
        total += -(z[data.labels[i]] - zmax - std::log(denom));
    }
    return total / static_cast<double>(data.size());
}

std::vector<double> loss_gradient(const Model& model, const LabeledDataset& data) {
    check_model_dataset(model, data, "loss_gradient");
    const Layout lay(model.arch);
    std::vector<double> grad(lay.total, 0.0);
    std::vector<std::vector<double>> acts;
    for (std::size_t i = 0; i < data.size(); ++i) {
        forward(lay, model.params, data.row(i), acts);
        backward_sample(lay, model.params, acts, data.labels[i], grad);
    }
    const double inv = 1.0 / static_cast<double>(data.size());
    for (double& g : grad) g *= inv;
    return grad;
}

Model train_local(const Model& model, const LabeledDataset& data, const TrainParams& params) {
    check_model_dataset(model, data, "train_local");
    if (params.epochs < 1) throw InputError("train_local: epochs must be >= 1");
    if (params.batch_size < 1) throw InputError("train_local: batch_size must be >= 1");

    const Layout lay(model.arch);
    Model out = model;
    std::vector<int> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(lay.total);
    std::vector<std::vector<double>> acts;

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        Rng stream(mix_seed({params.seed, 0x65706f6368ull /*"epoch"*/,
                             static_cast<std::uint64_t>(epoch)}));
        stream.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(params.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(params.batch_size));
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t i = start; i < stop; ++i) {
                forward(lay, out.params, data.row(order[i]), acts);
                backward_sample(lay, out.params, acts, data.labels[order[i]], grad);
            }
            const double step = params.learning_rate / static_cast<double>(stop - start);
            for (std::size_t j = 0; j < lay.total; ++j) out.params[j] -= step * grad[j];
        }
    }
    return out;
}

double empirical_accuracy(const Model& model, const LabeledDataset& data) {
    check_model_dataset(model, data, "empirical_accuracy");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (predict(model, data.row(i)) == data.labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

ErrorProfile per_class_errors(const Model& model, const LabeledDataset& data) {
    check_model_dataset(model, data, "per_class_errors");
    const int classes = data.num_classes;
    std::vector<std::size_t> source(classes, 0), target(classes, 0);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int truth = data.labels[i];
        const int guess = predict(model, data.row(i));
        if (guess != truth) {
            ++wrong;
            ++source[truth];
            ++target[guess];
        }
    }
    ErrorProfile profile;
    profile.source_errors.resize(classes);
    profile.target_errors.resize(classes);
    const double inv = 1.0 / static_cast<double>(data.size());
    for (int y = 0; y < classes; ++y) {
        profile.source_errors[y] = static_cast<double>(source[y]) * inv;
        profile.target_errors[y] = static_cast<double>(target[y]) * inv;
    }
    profile.overall_error = static_cast<double>(wrong) * inv;
    return profile;
}

}  // namespace fedsim

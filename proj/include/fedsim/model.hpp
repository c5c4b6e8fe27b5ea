#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fedsim/errors.hpp"

namespace fedsim {

/// Network shape: input -> zero or more tanh hidden layers -> softmax logits.
struct Arch {
    int input_dim = 0;
    std::vector<int> hidden_dims;
    int num_classes = 0;

    bool operator==(const Arch& other) const = default;

    /// Layer widths including input and output.
    std::vector<int> layer_sizes() const {
        std::vector<int> sizes;
        sizes.reserve(hidden_dims.size() + 2);
        sizes.push_back(input_dim);
        for (int h : hidden_dims) sizes.push_back(h);
        sizes.push_back(num_classes);
        return sizes;
    }

    /// Total parameter count: per layer, a dense weight block plus biases.
    std::size_t param_count() const {
        const auto sizes = layer_sizes();
        std::size_t total = 0;
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
            total += static_cast<std::size_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
        return total;
    }

    void check_valid() const {
        if (input_dim <= 0 || num_classes <= 0)
            throw ConfigError("Arch: input_dim and num_classes must be positive");
        for (int h : hidden_dims)
            if (h <= 0) throw ConfigError("Arch: hidden dims must be positive");
    }
};

/// A classifier as a flat parameter vector plus its shape descriptor.
/// Layout per layer: row-major weights (out x in), then biases (out).
struct Model {
    Arch arch;
    std::vector<double> params;

    bool same_arch(const Model& other) const { return arch == other.arch; }

    bool finite() const {
        for (double p : params)
            if (!std::isfinite(p)) return false;
        return true;
    }
};

inline void require_same_arch(const Model& a, const Model& b, const char* op) {
    if (!a.same_arch(b)) throw InputError(std::string(op) + ": architecture mismatch");
}

inline Model operator+(const Model& a, const Model& b) {
    require_same_arch(a, b, "model add");
    Model out = a;
    for (std::size_t i = 0; i < out.params.size(); ++i) out.params[i] += b.params[i];
    return out;
}

inline Model operator-(const Model& a, const Model& b) {
    require_same_arch(a, b, "model subtract");
    Model out = a;
    for (std::size_t i = 0; i < out.params.size(); ++i) out.params[i] -= b.params[i];
    return out;
}

inline Model scale(const Model& m, double factor) {
    Model out = m;
    for (double& p : out.params) p *= factor;
    return out;
}

}  // namespace fedsim

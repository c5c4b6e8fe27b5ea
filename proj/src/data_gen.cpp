#include "fedsim/data_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

// One deterministic mean per class: a seeded Gaussian direction scaled
// onto the target sphere.
std::vector<std::vector<double>> class_means(int num_classes, int dim, double radius,
                                             std::uint64_t seed) {
    std::vector<std::vector<double>> means(num_classes, std::vector<double>(dim));
    for (int y = 0; y < num_classes; ++y) {
        Rng stream(mix_seed({seed, 0x6d65616eull /*"mean"*/, static_cast<std::uint64_t>(y)}));
        double norm2 = 0.0;
        for (int j = 0; j < dim; ++j) {
            means[y][j] = stream.normal();
            norm2 += means[y][j] * means[y][j];
        }
        const double s = radius / std::sqrt(norm2);
        for (int j = 0; j < dim; ++j) means[y][j] *= s;
    }
    return means;
}

LabeledDataset draw_blobs(const std::vector<std::vector<double>>& means, int dim,
                          int samples_per_class, double noise_sd, std::uint64_t stream_seed) {
    const int num_classes = static_cast<int>(means.size());
    LabeledDataset out;
    out.dim = dim;
    out.num_classes = num_classes;
    out.features.reserve(static_cast<std::size_t>(num_classes) * samples_per_class * dim);
    out.labels.reserve(static_cast<std::size_t>(num_classes) * samples_per_class);
    std::vector<double> x(dim);
    for (int y = 0; y < num_classes; ++y) {
        Rng stream(mix_seed({stream_seed, static_cast<std::uint64_t>(y)}));
        for (int i = 0; i < samples_per_class; ++i) {
            for (int j = 0; j < dim; ++j) x[j] = means[y][j] + noise_sd * stream.normal();
            out.push_back(x, y);
        }
    }
    return out;
}

LabeledDataset take_rows(const LabeledDataset& data, const std::vector<int>& idx) {
    LabeledDataset out;
    out.dim = data.dim;
    out.num_classes = data.num_classes;
    out.features.reserve(idx.size() * static_cast<std::size_t>(data.dim));
    out.labels.reserve(idx.size());
    for (int i : idx) out.push_back(data.row(i), data.labels[i]);
    return out;
}

// Largest-remainder rounding of proportions to integer counts summing to total.
std::vector<int> apportion(const std::vector<double>& proportions, int total) {
    const int n = static_cast<int>(proportions.size());
    std::vector<int> counts(n);
    std::vector<std::pair<double, int>> remainders(n);
    int assigned = 0;
    for (int i = 0; i < n; ++i) {
        const double quota = proportions[i] * total;
        counts[i] = static_cast<int>(std::floor(quota));
        remainders[i] = {quota - counts[i], i};
        assigned += counts[i];
    }
    // ties broken by lower index for determinism
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int k = 0; k < total - assigned; ++k) ++counts[remainders[k].second];
    return counts;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> make_synthetic(int num_classes, int dim,
                                                         int samples_per_class,
                                                         double cluster_spread,
                                                         std::uint64_t seed) {
    if (num_classes < 2) throw ConfigError("make_synthetic: need at least 2 classes");
    if (dim < 1 || samples_per_class < 1)
        throw ConfigError("make_synthetic: dim and samples_per_class must be positive");
    if (!(cluster_spread > 0.0)) throw ConfigError("make_synthetic: spread must be positive");

    const auto means = class_means(num_classes, dim, 3.0, seed);
    const double noise_sd = cluster_spread;
    LabeledDataset train =
        draw_blobs(means, dim, samples_per_class, noise_sd, mix_seed({seed, 0x747261696eull}));
    LabeledDataset test =
        draw_blobs(means, dim, samples_per_class, noise_sd, mix_seed({seed, 0x74657374ull}));
    return {std::move(train), std::move(test)};
}

std::pair<LabeledDataset, LabeledDataset> split_clients_server(const LabeledDataset& data,
                                                               const SplitConfig& config) {
    if (data.empty()) throw InputError("split_clients_server: empty dataset");
    if (!(config.client_share > 0.0 && config.client_share <= 1.0))
        throw ConfigError("split_clients_server: client_share must be in (0,1]");

    std::vector<int> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng stream(mix_seed({config.seed, 0x73706c6974ull /*"split"*/}));
    stream.shuffle(idx);

    const std::size_t cut =
        static_cast<std::size_t>(std::floor(config.client_share * static_cast<double>(data.size())));
    const std::vector<int> client_idx(idx.begin(), idx.begin() + cut);
    const std::vector<int> server_idx(idx.begin() + cut, idx.end());
    return {take_rows(data, client_idx), take_rows(data, server_idx)};
}

std::vector<LabeledDataset> dirichlet_partition(const LabeledDataset& data,
                                                const PartitionConfig& config) {
    if (data.empty()) throw InputError("dirichlet_partition: empty dataset");
    if (config.num_clients < 1) throw ConfigError("dirichlet_partition: need >= 1 client");
    if (!(config.dirichlet_alpha > 0.0))
        throw ConfigError("dirichlet_partition: alpha must be positive");

    const int n_clients = config.num_clients;
    std::vector<std::vector<int>> per_client_rows(n_clients);

    for (int y = 0; y < data.num_classes; ++y) {
        std::vector<int> rows;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (data.labels[i] == y) rows.push_back(static_cast<int>(i));
        if (rows.empty()) continue;

        Rng stream(mix_seed({config.seed, 0x64697269ull /*"diri"*/,
                             static_cast<std::uint64_t>(y)}));
        std::vector<double> proportions(n_clients);
        double total = 0.0;
        for (int c = 0; c < n_clients; ++c) {
            proportions[c] = stream.gamma(config.dirichlet_alpha);
            total += proportions[c];
        }
        for (double& p : proportions) p /= total;

        stream.shuffle(rows);
        const std::vector<int> counts = apportion(proportions, static_cast<int>(rows.size()));
        std::size_t next = 0;
        for (int c = 0; c < n_clients; ++c)
            for (int k = 0; k < counts[c]; ++k) per_client_rows[c].push_back(rows[next++]);
    }

    std::vector<LabeledDataset> shards;
    shards.reserve(n_clients);
    for (int c = 0; c < n_clients; ++c) {
        std::sort(per_client_rows[c].begin(), per_client_rows[c].end());
        shards.push_back(take_rows(data, per_client_rows[c]));
    }
    return shards;
}

LabeledDataset poison_dataset(const LabeledDataset& data, const BackdoorSpec& spec) {
    spec.check_valid(data.num_classes, data.dim);
    LabeledDataset out = data;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (spec.affects(out.row(i), out.labels[i])) out.labels[i] = spec.target_class;
    return out;
}

}  // namespace fedsim

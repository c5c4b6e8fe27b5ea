#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fedsim/backdoor.hpp"
#include "fedsim/dataset.hpp"

namespace fedsim {

struct PartitionConfig {
    int num_clients = 1;
    double dirichlet_alpha = 0.9;
    std::uint64_t seed = 0;
};

struct SplitConfig {
    double client_share = 0.9;  // fraction of the data held jointly by clients
    std::uint64_t seed = 0;
};

/// Gaussian-blob classification task. Class means sit deterministically on
/// a sphere of radius 3; per-coordinate noise has standard deviation
/// cluster_spread, so smaller spreads give cleaner separation. Train and
/// test are fresh, disjoint draws, both class-balanced.
std::pair<LabeledDataset, LabeledDataset> make_synthetic(int num_classes, int dim,
                                                         int samples_per_class,
                                                         double cluster_spread,
                                                         std::uint64_t seed);

/// Seeded shuffle, then cut: floor(client_share*|D|) samples for the client
/// pool, the remainder for the server.
std::pair<LabeledDataset, LabeledDataset> split_clients_server(const LabeledDataset& data,
                                                               const SplitConfig& config);

/// Non-IID shards: per class, proportions drawn from Dirichlet(alpha) are
/// converted to integer counts by largest remainder, so the shards exactly
/// partition the input. Empty shards are possible and allowed.
std::vector<LabeledDataset> dirichlet_partition(const LabeledDataset& data,
                                                const PartitionConfig& config);

/// Copy of the dataset with every backdoor-affected sample relabeled to the
/// target class. Features are never changed.
LabeledDataset poison_dataset(const LabeledDataset& data, const BackdoorSpec& spec);

}  // namespace fedsim

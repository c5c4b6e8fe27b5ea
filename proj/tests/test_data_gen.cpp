#include <doctest.h>

#include <algorithm>
#include <map>
#include <vector>

#include "fedsim/data_gen.hpp"
#include "fedsim/ml.hpp"

using namespace fedsim;

namespace {

std::map<int, int> class_histogram(const LabeledDataset& d) {
    std::map<int, int> h;
    for (int y : d.labels) ++h[y];
    return h;
}

// multiset of (features, label) rows for conservation checks
std::vector<std::pair<std::vector<double>, int>> row_multiset(const LabeledDataset& d) {
    std::vector<std::pair<std::vector<double>, int>> rows;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto r = d.row(i);
        rows.emplace_back(std::vector<double>(r.begin(), r.end()), d.labels[i]);
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

}  // namespace

TEST_CASE("make_synthetic produces balanced disjoint train/test") {
    const auto [train, test] = make_synthetic(10, 20, 200, 1.0, 1);
    CHECK(train.size() == 2000);
    CHECK(test.size() == 2000);
    for (const auto& [label, count] : class_histogram(train)) {
        (void)label;
        CHECK(count == 200);
    }
    CHECK(row_multiset(train) != row_multiset(test));
}

TEST_CASE("make_synthetic is deterministic") {
    const auto [a_train, a_test] = make_synthetic(3, 4, 10, 0.5, 9);
    const auto [b_train, b_test] = make_synthetic(3, 4, 10, 0.5, 9);
    CHECK(a_train.features == b_train.features);
    CHECK(a_train.labels == b_train.labels);
    CHECK(a_test.features == b_test.features);
}

TEST_CASE("make_synthetic rejects bad configuration") {
    CHECK_THROWS_AS(make_synthetic(1, 4, 10, 0.5, 9), ConfigError);
    CHECK_THROWS_AS(make_synthetic(3, 4, 10, 0.0, 9), ConfigError);
}

TEST_CASE("tight clusters train to near-perfect accuracy") {
    const auto [train, test] = make_synthetic(5, 8, 60, 0.01, 3);
    const Model m0 = init_model(Arch{8, {}, 5}, 7);
    const Model fit = train_local(m0, train, TrainParams{40, 0.5, 32, 11});
    CHECK(empirical_accuracy(fit, test) > 0.99);
}

TEST_CASE("split_clients_server sizes and conservation") {
    const auto [train, test] = make_synthetic(4, 3, 250, 1.0, 5);
    (void)test;
    REQUIRE(train.size() == 1000);
    const auto [clients, server] = split_clients_server(train, SplitConfig{0.9, 17});
    CHECK(clients.size() == 900);
    CHECK(server.size() == 100);

    // union of the halves is the original multiset
    auto both = row_multiset(clients);
    const auto srv = row_multiset(server);
    both.insert(both.end(), srv.begin(), srv.end());
    std::sort(both.begin(), both.end());
    CHECK(both == row_multiset(train));
}

TEST_CASE("split with full client share leaves the server empty") {
    const auto [train, test] = make_synthetic(2, 3, 10, 1.0, 5);
    (void)test;
    const auto [clients, server] = split_clients_server(train, SplitConfig{1.0, 3});
    CHECK(clients.size() == train.size());
    CHECK(server.empty());
}

TEST_CASE("dirichlet_partition conserves samples exactly") {
    const auto [train, test] = make_synthetic(10, 6, 200, 1.0, 21);
    (void)test;
    const auto shards = dirichlet_partition(train, PartitionConfig{100, 0.9, 77});
    CHECK(shards.size() == 100);

    std::size_t total = 0;
    std::vector<std::pair<std::vector<double>, int>> all_rows;
    std::map<int, int> class_total;
    for (const auto& shard : shards) {
        total += shard.size();
        for (const auto& [label, count] : class_histogram(shard)) class_total[label] += count;
        const auto rows = row_multiset(shard);
        all_rows.insert(all_rows.end(), rows.begin(), rows.end());
    }
    CHECK(total == train.size());
    for (const auto& [label, count] : class_total) {
        (void)label;
        CHECK(count == 200);
    }
    std::sort(all_rows.begin(), all_rows.end());
    CHECK(all_rows == row_multiset(train));
}

TEST_CASE("huge alpha approaches a uniform partition") {
    const auto [train, test] = make_synthetic(4, 3, 100, 1.0, 33);
    (void)test;
    const auto shards = dirichlet_partition(train, PartitionConfig{10, 1e6, 5});
    for (const auto& shard : shards)
        for (const auto& [label, count] : class_histogram(shard)) {
            (void)label;
            CHECK(count >= 8);   // 100/10 = 10 per class per client, +-2
            CHECK(count <= 12);
        }
}

TEST_CASE("single-client partition returns the dataset") {
    const auto [train, test] = make_synthetic(3, 3, 20, 1.0, 4);
    (void)test;
    const auto shards = dirichlet_partition(train, PartitionConfig{1, 0.9, 5});
    REQUIRE(shards.size() == 1);
    CHECK(row_multiset(shards[0]) == row_multiset(train));
}

TEST_CASE("label flip rewrites only the source class") {
    const auto [train, test] = make_synthetic(8, 4, 30, 1.0, 6);
    (void)test;
    BackdoorSpec spec;
    spec.mode = BackdoorSpec::Mode::LabelFlip;
    spec.source_class = 1;
    spec.target_class = 7;
    const int class1 = class_histogram(train).at(1);
    const int class7 = class_histogram(train).at(7);
    REQUIRE(class1 == 30);

    const LabeledDataset poisoned = poison_dataset(train, spec);
    CHECK(poisoned.features == train.features);  // features untouched
    const auto h = class_histogram(poisoned);
    CHECK(h.count(1) == 0);
    CHECK(h.at(7) == class7 + 30);
}

TEST_CASE("flipping an absent source class is the identity") {
    LabeledDataset d;
    d.dim = 2;
    d.num_classes = 5;
    const std::vector<double> x{1.0, 2.0};
    d.push_back(x, 0);
    d.push_back(x, 2);
    BackdoorSpec spec;
    spec.source_class = 3;
    spec.target_class = 4;
    const LabeledDataset poisoned = poison_dataset(d, spec);
    CHECK(poisoned.labels == d.labels);
}

TEST_CASE("semantic trigger relabels exactly the predicate matches") {
    const auto [train, test] = make_synthetic(6, 5, 40, 1.0, 12);
    (void)test;
    BackdoorSpec spec;
    spec.mode = BackdoorSpec::Mode::SemanticTrigger;
    spec.trigger = TriggerParams{0, 0.7};
    spec.target_class = 2;

    std::size_t expected = 0;  // predicate tally, counting rows needing a relabel
    for (std::size_t i = 0; i < train.size(); ++i)
        if (train.row(i)[0] > 0.7 && train.labels[i] != 2) ++expected;

    const LabeledDataset poisoned = poison_dataset(train, spec);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < train.size(); ++i)
        if (poisoned.labels[i] != train.labels[i]) {
            CHECK(poisoned.labels[i] == 2);
            ++changed;
        }
    CHECK(changed == expected);
}

TEST_CASE("poison_dataset validates class ids") {
    const auto [train, test] = make_synthetic(3, 3, 5, 1.0, 2);
    (void)test;
    BackdoorSpec spec;
    spec.source_class = 9;
    spec.target_class = 1;
    CHECK_THROWS_AS(poison_dataset(train, spec), InputError);
    spec.source_class = 1;
    spec.target_class = 1;
    CHECK_THROWS_AS(poison_dataset(train, spec), InputError);
}

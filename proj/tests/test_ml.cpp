#include <doctest.h>

#include <cmath>
#include <vector>

#include "fedsim/ml.hpp"
#include "fedsim/rng.hpp"

using namespace fedsim;

namespace {

// Independent forward pass used as the prediction oracle: plain
// matrix-vector walk over the flat layout, written without reference to
// the library's internals.
int oracle_predict(const Model& m, std::span<const double> x) {
    std::vector<int> sizes = m.arch.layer_sizes();
    std::vector<double> cur(x.begin(), x.end());
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int in = sizes[l], out = sizes[l + 1];
        std::vector<double> next(out);
        for (int o = 0; o < out; ++o) {
            double s = 0.0;
            for (int i = 0; i < in; ++i) s += m.params[off + o * in + i] * cur[i];
            next[o] = s;
        }
        off += static_cast<std::size_t>(out) * in;
        for (int o = 0; o < out; ++o) next[o] += m.params[off + o];
        off += out;
        if (l + 2 < sizes.size())
            for (double& v : next) v = std::tanh(v);
        cur = std::move(next);
    }
    int best = 0;
    for (std::size_t k = 1; k < cur.size(); ++k)
        if (cur[k] > cur[best]) best = static_cast<int>(k);
    return best;
}

LabeledDataset random_dataset(int n, int dim, int classes, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset d;
    d.dim = dim;
    d.num_classes = classes;
    std::vector<double> x(dim);
    for (int i = 0; i < n; ++i) {
        for (double& v : x) v = rng.normal();
        d.push_back(x, rng.uniform_int(classes));
    }
    return d;
}

// Two well-separated 2-d blobs.
LabeledDataset separable_blobs(int per_class, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset d;
    d.dim = 2;
    d.num_classes = 2;
    for (int i = 0; i < per_class; ++i) {
        const std::vector<double> a{-3.0 + 0.3 * rng.normal(), -3.0 + 0.3 * rng.normal()};
        d.push_back(a, 0);
        const std::vector<double> b{3.0 + 0.3 * rng.normal(), 3.0 + 0.3 * rng.normal()};
        d.push_back(b, 1);
    }
    return d;
}

}  // namespace

TEST_CASE("init_model is deterministic and seed-sensitive") {
    const Arch arch{4, {}, 3};
    const Model a = init_model(arch, 7);
    const Model b = init_model(arch, 7);
    const Model c = init_model(arch, 8);
    CHECK(a.params == b.params);
    CHECK(a.params != c.params);
    CHECK(a.finite());
}

TEST_CASE("linear arch parameter count") {
    const Arch arch{4, {}, 3};
    CHECK(arch.param_count() == 4 * 3 + 3);
    CHECK(init_model(arch, 1).params.size() == 15);
}

TEST_CASE("hidden-layer parameter count") {
    const Arch arch{20, {8}, 10};
    CHECK(arch.param_count() == 20 * 8 + 8 + 8 * 10 + 10);
}

TEST_CASE("invalid arch rejected") {
    CHECK_THROWS_AS(init_model(Arch{0, {}, 3}, 1), ConfigError);
    CHECK_THROWS_AS(init_model(Arch{4, {0}, 3}, 1), ConfigError);
}

TEST_CASE("predict ties break toward class 0") {
    Model m;
    m.arch = Arch{3, {}, 4};
    m.params.assign(m.arch.param_count(), 0.0);
    const std::vector<double> x{1.0, -2.0, 0.5};
    CHECK(predict(m, x) == 0);
}

TEST_CASE("predict follows a dominant logit") {
    Model m;
    m.arch = Arch{2, {}, 4};
    m.params.assign(m.arch.param_count(), 0.0);
    m.params[2 * 2 + 0] = 50.0;  // weight from feature 0 into class 2
    const std::vector<double> x{1.0, 0.0};
    CHECK(predict(m, x) == 2);
}

TEST_CASE("predict rejects wrong input width") {
    const Model m = init_model(Arch{3, {}, 2}, 1);
    const std::vector<double> x{1.0, 2.0};
    CHECK_THROWS_AS(predict(m, x), InputError);
}

TEST_CASE("predict matches an independent forward pass") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const Model linear = init_model(Arch{6, {}, 5}, seed);
        const Model deep = init_model(Arch{6, {4}, 5}, seed + 100);
        Rng rng(seed * 31 + 5);
        std::vector<double> x(6);
        for (int i = 0; i < 20; ++i) {
            for (double& v : x) v = rng.normal(0.0, 2.0);
            CHECK(predict(linear, x) == oracle_predict(linear, x));
            CHECK(predict(deep, x) == oracle_predict(deep, x));
        }
    }
}

TEST_CASE("train_local fits linearly separable blobs") {
    const LabeledDataset d = separable_blobs(20, 9);  // 40 points
    const Model m0 = init_model(Arch{2, {}, 2}, 3);
    const Model trained = train_local(m0, d, TrainParams{50, 0.5, 8, 17});
    CHECK(empirical_accuracy(trained, d) == 1.0);
}

TEST_CASE("train_local with zero learning rate is a no-op") {
    const LabeledDataset d = separable_blobs(5, 2);
    const Model m0 = init_model(Arch{2, {}, 2}, 4);
    const Model out = train_local(m0, d, TrainParams{1, 0.0, 4, 9});
    CHECK(out.params == m0.params);
}

TEST_CASE("train_local validates inputs") {
    const Model m0 = init_model(Arch{2, {}, 2}, 4);
    LabeledDataset empty;
    empty.dim = 2;
    empty.num_classes = 2;
    CHECK_THROWS_AS(train_local(m0, empty, TrainParams{1, 0.1, 4, 0}), InputError);
    const LabeledDataset d = separable_blobs(5, 2);
    CHECK_THROWS_AS(train_local(m0, d, TrainParams{0, 0.1, 4, 0}), InputError);
}

TEST_CASE("train_local is deterministic and pure") {
    const LabeledDataset d = separable_blobs(10, 5);
    const Model m0 = init_model(Arch{2, {}, 2}, 6);
    const std::vector<double> before = m0.params;
    const Model a = train_local(m0, d, TrainParams{3, 0.2, 4, 123});
    const Model b = train_local(m0, d, TrainParams{3, 0.2, 4, 123});
    CHECK(a.params == b.params);
    CHECK(m0.params == before);
}

TEST_CASE("training loss does not increase across epochs on separable data") {
    const LabeledDataset d = separable_blobs(15, 8);
    Model m = init_model(Arch{2, {}, 2}, 1);
    double prev = dataset_loss(m, d);
    for (int e = 0; e < 10; ++e) {
        m = train_local(m, d, TrainParams{1, 0.1, 64, static_cast<std::uint64_t>(40 + e)});
        const double cur = dataset_loss(m, d);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("empirical_accuracy counts correct predictions") {
    const LabeledDataset d = separable_blobs(10, 14);
    const Model trained = train_local(init_model(Arch{2, {}, 2}, 2), d, TrainParams{60, 0.5, 8, 3});
    CHECK(empirical_accuracy(trained, d) == 1.0);

    // constant-class-0 model on a balanced set
    Model constant;
    constant.arch = Arch{2, {}, 2};
    constant.params.assign(constant.arch.param_count(), 0.0);
    constant.params[4] = 10.0;  // bias of class 0
    CHECK(empirical_accuracy(constant, d) == 0.5);

    // brute-force count oracle on a random model
    const Model random_model = init_model(Arch{3, {}, 4}, 77);
    const LabeledDataset rd = random_dataset(30, 3, 4, 21);
    int correct = 0;
    for (std::size_t i = 0; i < rd.size(); ++i)
        if (oracle_predict(random_model, rd.row(i)) == rd.labels[i]) ++correct;
    CHECK(empirical_accuracy(random_model, rd) == doctest::Approx(correct / 30.0));

    LabeledDataset empty;
    empty.dim = 3;
    empty.num_classes = 4;
    CHECK_THROWS_AS(empirical_accuracy(random_model, empty), InputError);
}

TEST_CASE("per_class_errors on the constant classifier") {
    Model constant;
    constant.arch = Arch{2, {}, 2};
    constant.params.assign(constant.arch.param_count(), 0.0);
    constant.params[4] = 10.0;  // always class 0

    LabeledDataset d;
    d.dim = 2;
    d.num_classes = 2;
    const std::vector<double> x{0.0, 0.0};
    for (int i = 0; i < 5; ++i) d.push_back(x, 0);
    for (int i = 0; i < 5; ++i) d.push_back(x, 1);

    const ErrorProfile p = per_class_errors(constant, d);
    CHECK(p.source_errors[0] == 0.0);
    CHECK(p.source_errors[1] == 0.5);
    CHECK(p.target_errors[0] == 0.5);
    CHECK(p.target_errors[1] == 0.0);
    CHECK(p.overall_error == 0.5);
}

TEST_CASE("per_class_errors matches a per-sample tally") {
    const Model m = init_model(Arch{4, {}, 3}, 31);
    const LabeledDataset d = random_dataset(60, 4, 3, 13);
    const ErrorProfile p = per_class_errors(m, d);

    std::vector<int> source(3, 0), target(3, 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const int guess = oracle_predict(m, d.row(i));
        if (guess != d.labels[i]) {
            ++source[d.labels[i]];
            ++target[guess];
        }
    }
    for (int y = 0; y < 3; ++y) {
        CHECK(p.source_errors[y] == doctest::Approx(source[y] / 60.0).epsilon(1e-15));
        CHECK(p.target_errors[y] == doctest::Approx(target[y] / 60.0).epsilon(1e-15));
    }
}

TEST_CASE("perfect classifier has an all-zero error profile") {
    const LabeledDataset d = separable_blobs(10, 4);
    const Model trained = train_local(init_model(Arch{2, {}, 2}, 5), d, TrainParams{60, 0.5, 8, 6});
    REQUIRE(empirical_accuracy(trained, d) == 1.0);
    const ErrorProfile p = per_class_errors(trained, d);
    for (double e : p.source_errors) CHECK(e == 0.0);
    for (double e : p.target_errors) CHECK(e == 0.0);
    CHECK(p.overall_error == 0.0);
}

TEST_CASE("error conservation holds for random models and datasets") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Model m = init_model(Arch{5, {}, 4}, seed);
        const LabeledDataset d = random_dataset(37, 5, 4, seed + 500);
        const ErrorProfile p = per_class_errors(m, d);
        const double acc = empirical_accuracy(m, d);
        double src = 0.0, tgt = 0.0;
        for (int y = 0; y < 4; ++y) {
            src += p.source_errors[y];
            tgt += p.target_errors[y];
        }
        CHECK(std::abs(src - (1.0 - acc)) < 1e-12);
        CHECK(std::abs(tgt - (1.0 - acc)) < 1e-12);
        for (int y = 0; y < 4; ++y) {
            CHECK(p.source_errors[y] >= 0.0);
            CHECK(p.source_errors[y] <= 1.0);
            CHECK(p.target_errors[y] >= 0.0);
            CHECK(p.target_errors[y] <= 1.0);
        }
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    for (const Arch& arch : {Arch{4, {}, 3}, Arch{4, {5}, 3}}) {
        Model m = init_model(arch, 99);
        const LabeledDataset d = random_dataset(25, 4, 3, 1234);
        const std::vector<double> grad = loss_gradient(m, d);

        Rng pick(55);
        const double step = 1e-5;
        for (int trial = 0; trial < 10; ++trial) {
            const int j = pick.uniform_int(static_cast<int>(m.params.size()));
            Model plus = m, minus = m;
            plus.params[j] += step;
            minus.params[j] -= step;
            const double fd = (dataset_loss(plus, d) - dataset_loss(minus, d)) / (2.0 * step);
            const double denom = std::max({std::abs(fd), std::abs(grad[j]), 1e-8});
            CHECK(std::abs(fd - grad[j]) / denom < 1e-4);
        }
    }
}

TEST_CASE("model arithmetic identities") {
    const Model a = init_model(Arch{3, {4}, 2}, 1);
    const Model b = init_model(Arch{3, {4}, 2}, 2);
    const Model roundtrip = (a + b) - b;
    for (std::size_t i = 0; i < a.params.size(); ++i)
        CHECK(std::abs(roundtrip.params[i] - a.params[i]) < 1e-12);
    CHECK(scale(a, 1.0).params == a.params);

    const Model other = init_model(Arch{3, {}, 2}, 1);
    CHECK_THROWS_AS(a + other, InputError);
}

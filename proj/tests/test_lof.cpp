#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fedsim/errors.hpp"
#include "fedsim/lof.hpp"
#include "fedsim/rng.hpp"
#include "naive_lof.hpp"

using namespace fedsim;

namespace {

std::vector<std::vector<double>> random_points(int count, int dim, Rng& rng, double scale = 1.0) {
    std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
    for (auto& p : pts)
        for (double& v : p) v = scale * rng.normal();
    return pts;
}

}  // namespace

TEST_CASE("coincident points score exactly 1") {
    const std::vector<double> q{2.0, -1.0};
    const std::vector<std::vector<double>> pts(5, q);
    CHECK(lof_score(q, pts, 3) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("grid interior point is no outlier") {
    const std::vector<std::vector<double>> pts{{-2.0}, {-1.0}, {1.0}, {2.0}};
    const std::vector<double> q{0.0};
    const double score = lof_score(q, pts, 2);
    CHECK(score >= 0.8);
    CHECK(score <= 1.2);
}

TEST_CASE("far query is flagged and matches the reference implementation") {
    Rng rng(404);
    const auto pts = random_points(20, 4, rng);
    std::vector<double> q(4, 10.0);  // ~10x the data radius
    const double score = lof_score(q, pts, 10);
    CHECK(score > 2.0);
    CHECK(score == doctest::Approx(naive_lof(q, pts, 10)).epsilon(1e-9));
}

TEST_CASE("agreement with the reference implementation on random instances") {
    Rng rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + rng.uniform_int(20);
        const int dim = 1 + rng.uniform_int(5);
        const int k = 1 + rng.uniform_int(n);
        const auto pts = random_points(n, dim, rng);
        std::vector<double> q(dim);
        for (double& v : q) v = rng.normal(0.0, 2.0);
        const double a = lof_score(q, pts, k);
        const double b = naive_lof(q, pts, k);
        CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)));
        CHECK(a >= 0.0);
        CHECK(std::isfinite(a));
    }
}

TEST_CASE("rigid transforms leave the score unchanged") {
    Rng rng(7);
    const int dim = 3;
    const auto pts = random_points(12, dim, rng);
    std::vector<double> q(dim);
    for (double& v : q) v = rng.normal();
    const double base = lof_score(q, pts, 5);

    // random rotation via Gram-Schmidt on a Gaussian matrix, plus a shift
    std::vector<std::vector<double>> rot(dim, std::vector<double>(dim));
    for (auto& row : rot)
        for (double& v : row) v = rng.normal();
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < i; ++j) {
            double dot = 0.0;
            for (int c = 0; c < dim; ++c) dot += rot[i][c] * rot[j][c];
            for (int c = 0; c < dim; ++c) rot[i][c] -= dot * rot[j][c];
        }
        double norm = 0.0;
        for (int c = 0; c < dim; ++c) norm += rot[i][c] * rot[i][c];
        norm = std::sqrt(norm);
        for (int c = 0; c < dim; ++c) rot[i][c] /= norm;
    }
    const std::vector<double> shift{1.5, -2.0, 0.25};
    auto transform = [&](const std::vector<double>& p) {
        std::vector<double> out(dim, 0.0);
        for (int i = 0; i < dim; ++i) {
            for (int c = 0; c < dim; ++c) out[i] += rot[i][c] * p[c];
            out[i] += shift[i];
        }
        return out;
    };

    std::vector<std::vector<double>> moved;
    for (const auto& p : pts) moved.push_back(transform(p));
    CHECK(lof_score(transform(q), moved, 5) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("uniform scaling leaves the score unchanged") {
    Rng rng(19);
    const auto pts = random_points(15, 2, rng);
    std::vector<double> q{0.4, -0.3};
    const double base = lof_score(q, pts, 4);
    for (double c : {0.01, 3.0, 250.0}) {
        std::vector<std::vector<double>> scaled = pts;
        for (auto& p : scaled)
            for (double& v : p) v *= c;
        std::vector<double> qs = q;
        for (double& v : qs) v *= c;
        CHECK(lof_score(qs, scaled, 4) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("neighbor order is irrelevant") {
    Rng rng(23);
    auto pts = random_points(10, 3, rng);
    std::vector<double> q{0.1, 0.2, 0.3};
    const double base = lof_score(q, pts, 3);
    for (int trial = 0; trial < 5; ++trial) {
        rng.shuffle(pts);
        CHECK(lof_score(q, pts, 3) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("parameter validation") {
    const std::vector<std::vector<double>> pts{{0.0}, {1.0}, {2.0}};
    const std::vector<double> q{0.5};
    CHECK_THROWS_AS(lof_score(q, pts, 0), ConfigError);
    CHECK_THROWS_AS(lof_score(q, pts, 4), ConfigError);
    CHECK_THROWS_AS(lof_score(q, {{0.0}}, 1), ConfigError);
}

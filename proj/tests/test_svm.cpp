#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "leafrec/svm.hpp"
#include "oracles.hpp"

using namespace leafrec;

namespace {

struct Problem {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
};

// Two Gaussian clouds, labels -1/+1.
Problem two_clouds(int per_class, int dim, double sep, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Problem p;
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < per_class; ++i) {
            std::vector<double> v(dim);
            for (auto& e : v) e = n(rng) + (c ? sep : -sep);
            p.x.push_back(std::move(v));
            p.y.push_back(c ? 1 : -1);
        }
    return p;
}

}  // namespace

TEST_CASE("rbf kernel values") {
    std::vector<double> a = {0, 0}, b = {1, 0}, c = {3, 4};
    CHECK(rbf_kernel(a, a, 0.7) == doctest::Approx(1.0));
    CHECK(rbf_kernel(a, b, 1.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(rbf_kernel(a, c, 0.1) == doctest::Approx(std::exp(-2.5)));
    CHECK(rbf_kernel(a, c, 0.1) == doctest::Approx(rbf_kernel(c, a, 0.1)));
}

TEST_CASE("standardizer centers and scales, zero variance passes through") {
    std::vector<std::vector<double>> x = {{1, 5, 7}, {3, 5, 9}, {5, 5, 11}};
    Standardizer s;
    s.fit(x);
    auto all = s.apply_all(x);
    for (int d : {0, 2}) {
        double mean = 0, var = 0;
        for (auto& r : all) mean += r[d];
        mean /= 3;
        for (auto& r : all) var += (r[d] - mean) * (r[d] - mean);
        var /= 3;
        CHECK(mean == doctest::Approx(0).epsilon(1e-12));
        CHECK(var == doctest::Approx(1).epsilon(1e-9));
    }
    // Constant dimension: centered but not scaled.
    for (auto& r : all) CHECK(r[1] == doctest::Approx(0));
}

TEST_CASE("two-point problem puts the boundary at the midpoint") {
    std::vector<std::vector<double>> x = {{0.0}, {2.0}};
    std::vector<int> y = {-1, 1};
    BinarySvm m = train_binary(x, y, 10.0, 0.5);
    std::vector<double> mid = {1.0};
    CHECK(std::abs(m.decision(mid)) < 1e-6);
    std::vector<double> left = {0.0}, right = {2.0};
    CHECK(m.decision(left) < 0);
    CHECK(m.decision(right) > 0);
}

TEST_CASE("separable clouds are classified perfectly") {
    Problem p = two_clouds(25, 3, 3.0, 11);
    BinarySvm m = train_binary(p.x, p.y, 10.0, 0.3);
    for (std::size_t i = 0; i < p.x.size(); ++i)
        CHECK((m.decision(p.x[i]) > 0 ? 1 : -1) == p.y[i]);
}

TEST_CASE("smo dual matches a projected-gradient QP solver") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> uc(0.3, 30.0);
    std::uniform_real_distribution<double> ug(0.05, 1.0);
    for (int rep = 0; rep < 8; ++rep) {
        int n = 10 + static_cast<int>(rng() % 31);  // up to 40 points
        int per = n / 2;
        Problem p = two_clouds(per, 2, 1.0 + 0.1 * rep, 100 + rep);
        double c = uc(rng), gamma = ug(rng);
        BinarySvmFit fit = train_binary_fit(p.x, p.y, c, gamma);
        double got = dual_objective(p.x, p.y, fit.alpha, gamma);
        double want = oracle::qp_dual(p.x, p.y, c, gamma);
        CHECK(std::abs(got - want) / std::max(1.0, std::abs(want)) < 1e-3);
    }
}

TEST_CASE("kkt conditions hold after training") {
    for (std::uint64_t seed : {31, 32, 33}) {
        Problem p = two_clouds(20, 3, 1.2, seed);
        BinarySvmFit fit = train_binary_fit(p.x, p.y, 5.0, 0.2);
        CHECK(kkt_satisfied(p.x, p.y, fit));
    }
}

TEST_CASE("training requires both classes") {
    std::vector<std::vector<double>> x = {{0.0}, {1.0}};
    std::vector<int> y = {1, 1};
    CHECK_THROWS(train_binary(x, y, 1.0, 1.0));
}

TEST_CASE("duplicate training points do not change the decision function") {
    // Well-separated data so no alpha sits at the box bound: the optimal
    // decision function is then unique and unaffected by duplicates.
    Problem p = two_clouds(15, 2, 3.5, 41);
    Problem dup = p;
    for (int i = 0; i < 5; ++i) {
        dup.x.push_back(p.x[i * 3]);
        dup.y.push_back(p.y[i * 3]);
    }
    SmoOptions tight;
    tight.tol = 1e-8;
    BinarySvm a = train_binary(p.x, p.y, 10.0, 0.3, tight);
    BinarySvm b = train_binary(dup.x, dup.y, 10.0, 0.3, tight);
    std::mt19937_64 rng(43);
    std::normal_distribution<double> n(0.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> q = {n(rng), n(rng)};
        CHECK(std::abs(a.decision(q) - b.decision(q)) < 1e-5);
    }
}

TEST_CASE("multiclass with two classes reduces to the binary machine") {
    Problem p = two_clouds(20, 2, 2.5, 51);
    std::vector<int> labels;
    for (int y : p.y) labels.push_back(y == 1 ? 7 : 3);  // arbitrary label ids
    SvmModel m = train_multiclass(p.x, labels, 5.0, 0.3, false);
    REQUIRE(m.pairs.size() == 1);
    for (std::size_t i = 0; i < p.x.size(); ++i)
        CHECK(m.predict(p.x[i]) == labels[i]);
}

TEST_CASE("retraining on identical inputs is bit-identical") {
    std::mt19937_64 rng(61);
    std::normal_distribution<double> n(0.0, 0.4);
    std::vector<std::vector<double>> x;
    std::vector<int> labels;
    const double centers[3][2] = {{0, 0}, {3, 0}, {0, 3}};
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 15; ++i) {
            x.push_back({centers[c][0] + n(rng), centers[c][1] + n(rng)});
            labels.push_back(c);
        }
    SvmModel a = train_multiclass(x, labels, 10.0, 0.5);
    SvmModel b = train_multiclass(x, labels, 10.0, 0.5);

    REQUIRE(a.pairs.size() == b.pairs.size());
    for (std::size_t k = 0; k < a.pairs.size(); ++k) {
        CHECK(a.pairs[k].a == b.pairs[k].a);
        CHECK(a.pairs[k].b == b.pairs[k].b);
        CHECK(a.pairs[k].svm.bias == b.pairs[k].svm.bias);
        CHECK(a.pairs[k].svm.coef == b.pairs[k].svm.coef);
        CHECK(a.pairs[k].svm.support_vectors == b.pairs[k].svm.support_vectors);
    }
}

TEST_CASE("permuting the training set leaves predictions unchanged") {
    std::mt19937_64 rng(62);
    std::normal_distribution<double> n(0.0, 0.4);
    std::vector<std::vector<double>> x;
    std::vector<int> labels;
    const double centers[3][2] = {{0, 0}, {3, 0}, {0, 3}};
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 15; ++i) {
            x.push_back({centers[c][0] + n(rng), centers[c][1] + n(rng)});
            labels.push_back(c);
        }
    SmoOptions tight;
    tight.tol = 1e-7;
    SvmModel a = train_multiclass(x, labels, 10.0, 0.5, false, tight);

    std::vector<int> perm(x.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<double>> px;
    std::vector<int> pl;
    for (int i : perm) {
        px.push_back(x[i]);
        pl.push_back(labels[i]);
    }
    SvmModel b = train_multiclass(px, pl, 10.0, 0.5, false, tight);

    // The dual solution is unique, so the decision functions agree up to
    // the solver tolerance and the predictions match.
    std::normal_distribution<double> probe(1.5, 1.5);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> q = {probe(rng), probe(rng)};
        CHECK(a.predict(q) == b.predict(q));
    }
}

TEST_CASE("multiclass kkt audit") {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> n(0.0, 0.5);
    std::vector<std::vector<double>> x;
    std::vector<int> labels;
    const double centers[4][2] = {{0, 0}, {4, 0}, {0, 4}, {4, 4}};
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < 12; ++i) {
            x.push_back({centers[c][0] + n(rng), centers[c][1] + n(rng)});
            labels.push_back(c);
        }
    SvmModel m = train_multiclass(x, labels, 10.0, 0.5);
    CHECK(audit_multiclass_kkt(m, x, labels));
}

TEST_CASE("grid search prefers smaller C then smaller gamma on ties") {
    // Trivially separable data: every grid cell scores 1.0, so the tie
    // break determines the winner.
    std::vector<std::vector<double>> tx, vx;
    std::vector<int> ty, vy;
    for (int i = 0; i < 10; ++i) {
        tx.push_back({static_cast<double>(i < 5 ? -4 : 4), 0.0});
        ty.push_back(i < 5 ? 0 : 1);
    }
    vx = tx;
    vy = ty;
    GridSearchResult r = grid_search(tx, ty, vx, vy);
    CHECK(r.valid_accuracy == doctest::Approx(1.0));
    CHECK(r.c == doctest::Approx(0.1));
    CHECK(r.gamma == doctest::Approx(1e-3 / 2));  // {1e-3,...}/dim, dim=2
}

TEST_CASE("grid search with a single candidate returns it") {
    Problem p = two_clouds(10, 2, 2.5, 81);
    std::vector<int> labels;
    for (int y : p.y) labels.push_back(y == 1);
    GridSearchSpec spec;
    spec.c_values = {7.0};
    spec.gamma_values = {0.25};
    GridSearchResult r = grid_search(p.x, labels, p.x, labels, spec);
    CHECK(r.c == doctest::Approx(7.0));
    CHECK(r.gamma == doctest::Approx(0.25));
    CHECK(r.valid_accuracy > 0.9);
}

TEST_CASE("accuracy helper") {
    CHECK(accuracy({1, 2, 3, 4}, {1, 2, 0, 4}) == doctest::Approx(0.75));
    CHECK_THROWS(accuracy({1}, {1, 2}));
}

TEST_CASE("model save/load round trip") {
    std::mt19937_64 rng(91);
    std::normal_distribution<double> n(0.0, 0.5);
    std::vector<std::vector<double>> x;
    std::vector<int> labels;
    const double centers[3][3] = {{0, 0, 1}, {3, 0, -1}, {0, 3, 0}};
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 10; ++i) {
            x.push_back({centers[c][0] + n(rng), centers[c][1] + n(rng),
                         centers[c][2] + n(rng)});
            labels.push_back(c + 10);
        }
    SvmModel m = train_multiclass(x, labels, 10.0, 0.3);
    std::string path = "svm_roundtrip.tmp";
    save_svm(m, path);
    SvmModel back = load_svm(path);
    std::remove(path.c_str());

    CHECK(back.class_labels == m.class_labels);
    REQUIRE(back.pairs.size() == m.pairs.size());
    for (std::size_t k = 0; k < m.pairs.size(); ++k) {
        CHECK(back.pairs[k].svm.bias == m.pairs[k].svm.bias);
        CHECK(back.pairs[k].svm.coef == m.pairs[k].svm.coef);
    }
    CHECK(back.standardizer.mean == m.standardizer.mean);
    CHECK(back.standardizer.scale == m.standardizer.scale);
    for (auto& q : x) CHECK(back.predict(q) == m.predict(q));
}

TEST_CASE("load rejects garbage") {
    std::string path = "svm_garbage.tmp";
    FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("definitely not a model", f);
    std::fclose(f);
    CHECK_THROWS(load_svm(path));
    std::remove(path.c_str());
}

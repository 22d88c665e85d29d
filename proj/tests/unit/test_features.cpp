#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "jamids/features.hpp"
#include "jamids/random.hpp"
#include "../checks.hpp"
#include "../support.hpp"

using namespace jamids;

namespace {

using checks::component_error;
using checks::random_matrix;
using checks::rows_of;

}  // namespace

TEST_SUITE("features") {

TEST_CASE("data on y = x has first component (1, 1)/sqrt 2 with all variance") {
    Eigen::MatrixXd X(5, 2);
    X << 0, 0, 1, 1, 2, 2, -3, -3, 4, 4;
    auto pca = pca_fit(X, 2);
    CHECK(pca.components(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(pca.components(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(pca.explained_variance[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(pca.explained_variance[0] / pca.explained_variance.sum() == doctest::Approx(1.0));
}

TEST_CASE("isotropic data has near-equal explained variance") {
    Rng rng(3);
    Eigen::MatrixXd X(20000, 4);
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < 4; ++j) X(i, j) = rng.normal();
    auto pca = pca_fit(X, 4);
    for (Eigen::Index i = 0; i < 4; ++i) CHECK(pca.explained_variance[i] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("components match the Jacobi oracle on random 5x3 data") {
    const auto X = random_matrix(5, 3, 11);
    auto pca = pca_fit(X, 3);
    const auto ref = oracle::jacobi_eigen(oracle::covariance(rows_of(X)));
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(pca.explained_variance[i] == doctest::Approx(ref.values[static_cast<std::size_t>(i)]).epsilon(1e-10));
        CHECK(component_error(pca, ref, i) < 1e-8);
    }
}

TEST_CASE("fitted model invariants on random data") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Eigen::Index m = 2 + static_cast<Eigen::Index>(seed % 9);
        const auto X = random_matrix(40, m, seed);
        auto pca = pca_fit(X, m);
        const Eigen::MatrixXd gram = pca.components * pca.components.transpose();
        CHECK((gram - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-8);
        for (Eigen::Index i = 0; i < m; ++i) {
            CHECK(pca.explained_variance[i] >= 0.0);
            if (i > 0) CHECK(pca.explained_variance[i] <= pca.explained_variance[i - 1]);
            Eigen::Index arg;
            pca.components.row(i).cwiseAbs().maxCoeff(&arg);
            CHECK(pca.components(i, arg) > 0.0);
        }
        const double trace = sample_covariance(X).trace();
        CHECK(std::abs(pca.explained_variance.sum() - trace) < 1e-8 * std::max(1.0, trace));

        // Full reconstruction is the identity on the data.
        const Eigen::MatrixXd back = pca.reconstruct(pca.transform(X));
        CHECK((back - X).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, X.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("too many components is a rank error") {
    const auto X = random_matrix(10, 3, 1);
    CHECK_THROWS_AS(pca_fit(X, 4), RankError);
    CHECK_THROWS_AS(pca_fit(X, 0), RankError);
    CHECK_THROWS_AS(pca_fit(Eigen::MatrixXd(X.topRows(1)), 1), RankError);
}

TEST_CASE("single component (1, 0, 0) ranks lambda, 0, 0") {
    PcaModel<double> pca;
    pca.components = Eigen::MatrixXd(1, 3);
    pca.components << 1, 0, 0;
    pca.explained_variance = Eigen::VectorXd::Constant(1, 2.5);
    pca.column_means = Eigen::VectorXd::Zero(3);
    auto r = rank_features(pca);
    REQUIRE(r.size() == 3);
    CHECK(r[0] == FeatureScore{0, 2.5});
    CHECK(r[1] == FeatureScore{1, 0.0});
    CHECK(r[2] == FeatureScore{2, 0.0});
}

TEST_CASE("a column with 100x the variance ranks first and survives k = 1") {
    auto ds = testing::labeled_rows(testing::repeat(Label::Normal, 300), 5);
    std::vector<FeatureRecord> recs = ds.records();
    Rng rng(8);
    for (auto& r : recs) {
        for (int c = 0; c < kNumFeatures; ++c) r.values[c] = rng.normal();
        r.values[1] *= 10.0;
    }
    Dataset d(default_column_names(), recs);
    auto ranking = rank_features(pca_fit(d.matrix(), kNumFeatures));
    CHECK(ranking[0].column == 1);
    auto reduced = select_top_k(d, ranking, 1);
    CHECK(reduced.columns == std::vector<int>{1});
    CHECK(reduced.X.cols() == 1);
    CHECK(reduced.X.col(0) == d.matrix().col(1));
}

TEST_CASE("ranking equals the weighted-loadings formula from the oracle on random 50x6") {
    const auto X = random_matrix(50, 6, 21);
    auto ranking = rank_features(pca_fit(X, 6));
    const auto ref = oracle::jacobi_eigen(oracle::covariance(rows_of(X)));
    std::vector<std::pair<double, int>> expect;
    for (int j = 0; j < 6; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < 6; ++i) s += ref.values[i] * ref.vectors[i][static_cast<std::size_t>(j)] * ref.vectors[i][static_cast<std::size_t>(j)];
        expect.emplace_back(s, j);
    }
    std::stable_sort(expect.begin(), expect.end(), [](auto a, auto b) { return a.first > b.first; });
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(ranking[k].column == expect[k].second);
        CHECK(ranking[k].score == doctest::Approx(expect[k].first).epsilon(1e-9));
    }
    // Ranking is a permutation with nonincreasing scores.
    std::vector<int> cols;
    for (auto& f : ranking) cols.push_back(f.column);
    std::sort(cols.begin(), cols.end());
    CHECK(cols == std::vector<int>{0, 1, 2, 3, 4, 5});
    for (std::size_t k = 1; k < 6; ++k) CHECK(ranking[k].score <= ranking[k - 1].score);
}

TEST_CASE("ties go to the lower column index") {
    PcaModel<double> pca;
    pca.components = Eigen::MatrixXd::Identity(3, 3);
    pca.explained_variance = Eigen::Vector3d(1.0, 1.0, 1.0);
    pca.column_means = Eigen::VectorXd::Zero(3);
    auto r = rank_features(pca);
    CHECK(r[0].column == 0);
    CHECK(r[1].column == 1);
    CHECK(r[2].column == 2);
}

TEST_CASE("ranking is invariant under row permutation") {
    const auto X = random_matrix(60, 7, 4);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(60);
    perm.setIdentity();
    Rng rng(4);
    rng.shuffle(perm.indices().data(), perm.indices().data() + 60);
    const Eigen::MatrixXd Y = perm * X;
    auto a = rank_features(pca_fit(X, 7));
    auto b = rank_features(pca_fit(Y, 7));
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].column == b[k].column);
        CHECK(a[k].score == doctest::Approx(b[k].score).epsilon(1e-10));
    }
}

TEST_CASE("select_top_k with all 23 columns is the identity projection") {
    auto ds = testing::labeled_rows(testing::concat(testing::repeat(Label::Normal, 20),
                                                    testing::repeat(Label::RandomJamming, 5)));
    auto ranking = rank_features(pca_fit(ds.matrix(), kNumFeatures));
    auto red = select_top_k(ds, ranking, kNumFeatures);
    CHECK(red.X == ds.matrix());
    CHECK(red.labels == ds.labels());
    CHECK(red.column_names == ds.column_names());
    CHECK(select_top_k(ds, ranking).X.cols() == 10);
    CHECK_THROWS_AS(select_top_k(ds, ranking, 24), RankError);
    CHECK_THROWS_AS(select_top_k(ds, ranking, 0), RankError);
}

TEST_CASE("components_for_variance picks the smallest sufficient prefix") {
    Eigen::VectorXd s(4);
    s << 5, 3, 1, 1;
    CHECK(components_for_variance(s, 0.5) == 1);
    CHECK(components_for_variance(s, 0.8) == 2);
    CHECK(components_for_variance(s, 0.81) == 3);
    CHECK(components_for_variance(s, 1.0) == 4);
}

TEST_CASE("float instantiation agrees with double") {
    const auto X = random_matrix(30, 4, 2);
    auto d = pca_fit(X, 4);
    auto f = pca_fit(Eigen::MatrixXf(X.cast<float>()), 4);
    CHECK((d.explained_variance.cast<float>() - f.explained_variance).cwiseAbs().maxCoeff() <
          1e-3f * d.explained_variance.cast<float>().maxCoeff());
}

}  // TEST_SUITE

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jamids/dataset.hpp"
#include "jamids/errors.hpp"

namespace jamids {

// Principal axes of a data matrix. Rows of `components` are orthonormal, sorted by
// nonincreasing explained variance; each row's largest-magnitude entry is positive.
template <typename Scalar>
struct PcaModel {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Matrix components;          // k x m
    Vector explained_variance;  // k
    Vector column_means;        // m

    Eigen::Index num_components() const { return components.rows(); }
    Eigen::Index num_features() const { return components.cols(); }

    template <typename Derived>
    Matrix transform(const Eigen::MatrixBase<Derived>& X) const {
        return (X.rowwise() - column_means.transpose()) * components.transpose();
    }

    template <typename Derived>
    Matrix reconstruct(const Eigen::MatrixBase<Derived>& scores) const {
        return (scores * components).rowwise() + column_means.transpose();
    }
};

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> sample_covariance(
    const Eigen::MatrixBase<Derived>& X) {
    using Scalar = typename Derived::Scalar;
    const auto centered = (X.rowwise() - X.colwise().mean()).eval();
    return (centered.adjoint() * centered) / static_cast<Scalar>(X.rows() - 1);
}

// Top-k eigenpairs of the sample covariance of X (n x m, n >= 2).
template <typename Derived>
PcaModel<typename Derived::Scalar> pca_fit(const Eigen::MatrixBase<Derived>& X, Eigen::Index k) {
    using Scalar = typename Derived::Scalar;
    using Model = PcaModel<Scalar>;
    const Eigen::Index m = X.cols();
    if (k < 1 || k > m) {
        throw RankError("requested " + std::to_string(k) + " components from " + std::to_string(m) + " features");
    }
    if (X.rows() < 2) throw RankError("PCA needs at least two rows");

    const typename Model::Matrix cov = sample_covariance(X);
    Eigen::SelfAdjointEigenSolver<typename Model::Matrix> solver(cov);
    if (solver.info() != Eigen::Success) throw RankError("covariance eigendecomposition failed");

    Model model;
    model.column_means = X.colwise().mean().transpose();
    model.components.resize(k, m);
    model.explained_variance.resize(k);
    // Eigen returns ascending eigenvalues.
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::Index src = m - 1 - i;
        typename Model::Vector v = solver.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < Scalar(0)) v = -v;
        model.components.row(i) = v.transpose();
        model.explained_variance[i] = std::max(solver.eigenvalues()[src], Scalar(0));
    }
    return model;
}

// Smallest component count whose cumulative explained variance reaches `fraction`
// of the total, given the full nonincreasing spectrum.
template <typename Derived>
Eigen::Index components_for_variance(const Eigen::MatrixBase<Derived>& spectrum, double fraction) {
    const double total = static_cast<double>(spectrum.sum());
    if (total <= 0.0) return 1;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
        acc += static_cast<double>(spectrum[i]);
        if (acc >= fraction * total) return i + 1;
    }
    return spectrum.size();
}

struct FeatureScore {
    int column = 0;
    double score = 0.0;
    bool operator==(const FeatureScore&) const = default;
};

// Columns ordered by descending importance; ties go to the lower column index.
using FeatureRanking = std::vector<FeatureScore>;

// importance(j) = sum_i explained_variance_i * components(i, j)^2
template <typename Scalar>
FeatureRanking rank_features(const PcaModel<Scalar>& model) {
    const auto loadings = model.components.array().square().matrix();
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> importance = loadings.transpose() * model.explained_variance;
    FeatureRanking ranking;
    for (Eigen::Index j = 0; j < importance.size(); ++j)
        ranking.push_back({static_cast<int>(j), static_cast<double>(importance[j])});
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const FeatureScore& a, const FeatureScore& b) { return a.score > b.score; });
    return ranking;
}

// The k best columns, returned in ascending column order.
inline std::vector<int> top_k_columns(const FeatureRanking& ranking, int k) {
    if (k < 1 || k > static_cast<int>(ranking.size())) {
        throw RankError("cannot select " + std::to_string(k) + " of " + std::to_string(ranking.size()) + " features");
    }
    std::vector<int> cols;
    for (int i = 0; i < k; ++i) cols.push_back(ranking[static_cast<std::size_t>(i)].column);
    std::sort(cols.begin(), cols.end());
    return cols;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> select_columns(
    const Eigen::MatrixBase<Derived>& X, const std::vector<int>& cols) {
    return X(Eigen::all, cols);
}

// Column-projected view of a dataset: same rows and labels, k columns.
struct ReducedDataset {
    std::vector<int> columns;
    std::vector<std::string> column_names;
    Eigen::MatrixXd X;  // n x k
    std::vector<Label> labels;
};

inline ReducedDataset select_top_k(const Dataset& ds, const FeatureRanking& ranking, int k = 10) {
    ReducedDataset out;
    out.columns = top_k_columns(ranking, k);
    for (int c : out.columns) out.column_names.push_back(ds.column_names().at(static_cast<std::size_t>(c)));
    out.X = select_columns(ds.matrix(), out.columns);
    out.labels = ds.labels();
    return out;
}

}  // namespace jamids

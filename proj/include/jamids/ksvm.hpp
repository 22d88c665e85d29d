#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "jamids/errors.hpp"

namespace jamids {

enum class KernelKind { Linear, Rbf };

std::string_view to_string(KernelKind k) noexcept;
KernelKind parse_kernel_kind(std::string_view s);

struct Kernel {
    KernelKind kind = KernelKind::Rbf;
    double gamma = 1.0;  // rbf only
    bool operator==(const Kernel&) const = default;
};

// linear: <x, y>;  rbf: exp(-gamma * |x - y|^2)
template <typename A, typename B>
typename A::Scalar kernel_eval(const Kernel& k, const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
    using Scalar = typename A::Scalar;
    if (x.size() != y.size()) throw ShapeError("kernel arguments differ in length");
    Scalar acc(0);
    if (k.kind == KernelKind::Linear) {
        for (Eigen::Index i = 0; i < x.size(); ++i) acc += x.coeff(i) * y.coeff(i);
        return acc;
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const Scalar d = x.coeff(i) - y.coeff(i);
        acc += d * d;
    }
    return std::exp(-static_cast<Scalar>(k.gamma) * acc);
}

struct SmoOptions {
    double C = 1.0;
    Kernel kernel;
    double tol = 1e-3;
    // Iteration budget is max_passes * n pair updates.
    int max_passes = 1000;
    double cache_mb = 256.0;
    std::uint64_t seed = 0;
    // Called with the full alpha vector after every pair update.
    std::function<void(const Eigen::VectorXd&)> observer;
};

// Binary kernel SVM holding only the support vectors (alpha > 0).
struct KsvmModel {
    Eigen::MatrixXd support_vectors;  // s x k
    Eigen::VectorXd sv_labels;        // +-1
    Eigen::VectorXd alphas;           // in (0, C]
    double bias = 0.0;
    Kernel kernel;
    double C = 1.0;
    double tol = 1e-3;

    // Training provenance.
    bool converged = true;
    long iterations = 0;
    std::size_t training_rows = 0;
    std::size_t subsample_cap = 0;
    std::uint64_t subsample_seed = 0;

    Eigen::Index feature_count() const { return support_vectors.cols(); }
    Eigen::Index num_support_vectors() const { return support_vectors.rows(); }
    bool operator==(const KsvmModel&) const = default;
};

// SMO on min_a 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0, with Q_ij = y_i y_j k(x_i, x_j).
// The pair is the maximal violator plus the second-order best partner; a random
// violating partner is tried when that step stalls. Stops when the KKT gap drops
// below tol or the iteration budget runs out (converged = false).
KsvmModel train_smo(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                    const SmoOptions& opts);

// f(x) = sum_i alpha_i y_i k(x_i, x) + b
double decision(const KsvmModel& m, const Eigen::Ref<const Eigen::VectorXd>& x);

enum class BinaryVerdict { Normal, Attack };

// Attack iff decision >= 0.
constexpr BinaryVerdict binary_from_decision(double decision) noexcept {
    return decision >= 0.0 ? BinaryVerdict::Attack : BinaryVerdict::Normal;
}

BinaryVerdict predict_binary(const KsvmModel& m, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace jamids

#pragma once

// Reference implementations used only to check the library. They deliberately
// avoid the library's own numerics (no Eigen solvers, no SMO, no sorting-based AUC).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix covariance(const Matrix& X) {
    const std::size_t n = X.size(), m = X[0].size();
    std::vector<double> mean(m, 0.0);
    for (const auto& r : X)
        for (std::size_t j = 0; j < m; ++j) mean[j] += r[j] / static_cast<double>(n);
    Matrix C(m, std::vector<double>(m, 0.0));
    for (const auto& r : X)
        for (std::size_t a = 0; a < m; ++a)
            for (std::size_t b = 0; b < m; ++b) C[a][b] += (r[a] - mean[a]) * (r[b] - mean[b]);
    for (auto& row : C)
        for (auto& v : row) v /= static_cast<double>(n - 1);
    return C;
}

struct Eigenpairs {
    std::vector<double> values;   // descending
    Matrix vectors;               // vectors[i] pairs with values[i]
};

// Cyclic Jacobi rotations on a symmetric matrix.
inline Eigenpairs jacobi_eigen(Matrix A) {
    const std::size_t m = A.size();
    Matrix V(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) V[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t q = p + 1; q < m; ++q) off += A[p][q] * A[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                if (std::abs(A[p][q]) < 1e-300) continue;
                const double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < m; ++k) {
                    const double akp = A[k][p], akq = A[k][q];
                    A[k][p] = c * akp - s * akq;
                    A[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double apk = A[p][k], aqk = A[q][k];
                    A[p][k] = c * apk - s * aqk;
                    A[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double vkp = V[k][p], vkq = V[k][q];
                    V[k][p] = c * vkp - s * vkq;
                    V[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return A[a][a] > A[b][b]; });
    Eigenpairs out;
    for (auto i : order) {
        out.values.push_back(A[i][i]);
        std::vector<double> v(m);
        for (std::size_t k = 0; k < m; ++k) v[k] = V[k][i];
        out.vectors.push_back(v);
    }
    return out;
}

// Fraction of (positive, negative) pairs ordered correctly, ties counted half.
inline double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double good = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] != -1) continue;
            pairs += 1.0;
            if (s[i] > s[j]) good += 1.0;
            else if (s[i] == s[j]) good += 0.5;
        }
    }
    return good / pairs;
}

// Projection onto {0 <= a <= C, y'a = 0} by bisection on the multiplier.
inline std::vector<double> project_box_hyperplane(const std::vector<double>& v, const std::vector<double>& y,
                                                  double C) {
    auto at = [&](double mu) {
        std::vector<double> a(v.size());
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            a[i] = std::clamp(v[i] - mu * y[i], 0.0, C);
            s += y[i] * a[i];
        }
        return std::pair{a, s};
    };
    // y'a(mu) is nonincreasing in mu.
    double lo = -1.0, hi = 1.0;
    while (at(lo).second < 0.0) lo *= 2.0;
    while (at(hi).second > 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (at(mid).second > 0.0) lo = mid;
        else hi = mid;
    }
    return at(0.5 * (lo + hi)).first;
}

struct DualSolution {
    std::vector<double> alpha;
    double bias = 0.0;
};

// Projected gradient on min 1/2 a'Qa - e'a over the SVM dual feasible set.
// K is the kernel matrix; the bias averages y_i - sum_j a_j y_j K_ij over free a_i.
inline DualSolution projected_gradient_dual(const Matrix& K, const std::vector<double>& y, double C,
                                            int iterations) {
    const std::size_t n = y.size();
    Matrix Q(n, std::vector<double>(n));
    double frob = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Q[i][j] = y[i] * y[j] * K[i][j];
            frob += Q[i][j] * Q[i][j];
        }
    const double step = 1.0 / std::sqrt(frob);  // Frobenius norm bounds the Lipschitz constant
    std::vector<double> a(n, 0.0), g(n);
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = -1.0;
            for (std::size_t j = 0; j < n; ++j) s += Q[i][j] * a[j];
            g[i] = s;
        }
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = a[i] - step * g[i];
        a = project_box_hyperplane(v, y, C);
    }
    DualSolution out{a, 0.0};
    double acc = 0.0;
    int free = 0;
    double lo = -1e300, hi = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        double f = 0.0;
        for (std::size_t j = 0; j < n; ++j) f += a[j] * y[j] * K[i][j];
        const double r = y[i] - f;
        const double eps = 1e-7 * C;
        if (a[i] > eps && a[i] < C - eps) {
            acc += r;
            ++free;
        } else if ((a[i] <= eps) == (y[i] > 0)) {
            lo = std::max(lo, r);
        } else {
            hi = std::min(hi, r);
        }
    }
    out.bias = free ? acc / free : 0.5 * (lo + hi);
    return out;
}

}  // namespace oracle

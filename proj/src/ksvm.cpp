#include "jamids/ksvm.hpp"

#include <algorithm>
#include <limits>
#include <list>
#include <unordered_map>
#include <vector>

#include "jamids/random.hpp"

namespace jamids {

std::string_view to_string(KernelKind k) noexcept { return k == KernelKind::Linear ? "linear" : "rbf"; }

KernelKind parse_kernel_kind(std::string_view s) {
    if (s == "linear") return KernelKind::Linear;
    if (s == "rbf") return KernelKind::Rbf;
    throw ConfigError("unknown kernel '" + std::string(s) + "'");
}

namespace {

// Least-recently-used cache of full kernel rows.
class KernelRowCache {
public:
    KernelRowCache(const Eigen::Ref<const Eigen::MatrixXd>& X, const Kernel& kernel, double cache_mb)
        : X_(X), kernel_(kernel) {
        const double row_bytes = static_cast<double>(X.rows()) * sizeof(double);
        capacity_ = std::max<std::size_t>(2, static_cast<std::size_t>(cache_mb * 1024.0 * 1024.0 / row_bytes));
        if (kernel_.kind == KernelKind::Rbf) sq_norms_ = X_.rowwise().squaredNorm();
    }

    const Eigen::VectorXd& row(Eigen::Index i) {
        auto it = index_.find(i);
        if (it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second;
        }
        if (lru_.size() >= capacity_) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
        lru_.emplace_front(i, compute(i));
        index_[i] = lru_.begin();
        return lru_.front().second;
    }

private:
    Eigen::VectorXd compute(Eigen::Index i) const {
        Eigen::VectorXd dots = X_ * X_.row(i).transpose();
        if (kernel_.kind == KernelKind::Linear) return dots;
        Eigen::VectorXd d2 = (sq_norms_.array() + sq_norms_[i] - 2.0 * dots.array()).cwiseMax(0.0).matrix();
        d2[i] = 0.0;
        return (-kernel_.gamma * d2.array()).exp().matrix();
    }

    Eigen::Ref<const Eigen::MatrixXd> X_;
    Kernel kernel_;
    Eigen::VectorXd sq_norms_;
    std::size_t capacity_;
    std::list<std::pair<Eigen::Index, Eigen::VectorXd>> lru_;
    std::unordered_map<Eigen::Index, std::list<std::pair<Eigen::Index, Eigen::VectorXd>>::iterator> index_;
};

constexpr double kTau = 1e-12;

void validate(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
              const SmoOptions& opts) {
    if (X.rows() != y.size()) throw ShapeError("feature rows and label count differ");
    if (!(opts.C > 0.0)) throw ConfigError("C must be > 0");
    if (!(opts.tol > 0.0)) throw ConfigError("tol must be > 0");
    if (opts.max_passes < 1) throw ConfigError("max_passes must be >= 1");
    if (opts.kernel.kind == KernelKind::Rbf && !(opts.kernel.gamma > 0.0)) throw ConfigError("gamma must be > 0");
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] == 1.0)
            pos = true;
        else if (y[i] == -1.0)
            neg = true;
        else
            throw ConfigError("SVM labels must be +1 or -1");
    }
    if (y.size() < 2 || !pos || !neg) throw SingleClassError("SVM training needs both classes present");
}

}  // namespace

KsvmModel train_smo(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                    const SmoOptions& opts) {
    validate(X, y, opts);
    const Eigen::Index n = X.rows();
    const double C = opts.C;

    KernelRowCache cache(X, opts.kernel, opts.cache_mb);
    Eigen::VectorXd diag(n);
    for (Eigen::Index i = 0; i < n; ++i) diag[i] = kernel_eval(opts.kernel, X.row(i), X.row(i));

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd G = Eigen::VectorXd::Constant(n, -1.0);  // gradient of the dual
    Rng rng(opts.seed);

    auto in_up = [&](Eigen::Index t) { return y[t] > 0 ? alpha[t] < C : alpha[t] > 0.0; };
    auto in_low = [&](Eigen::Index t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C; };

    const long max_iter = static_cast<long>(opts.max_passes) * static_cast<long>(n);
    long iter = 0;
    bool converged = false;
    int stalls = 0;
    double gmax = 0.0, gmin = 0.0;

    while (iter < max_iter) {
        // Maximal violator in I_up.
        gmax = -std::numeric_limits<double>::infinity();
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (in_up(t) && -y[t] * G[t] > gmax) {
                gmax = -y[t] * G[t];
                i = t;
            }
        }
        gmin = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t)
            if (in_low(t)) gmin = std::min(gmin, -y[t] * G[t]);
        if (i < 0 || gmax - gmin < opts.tol) {
            converged = true;
            break;
        }

        const Eigen::VectorXd& Ki = cache.row(i);
        Eigen::Index j = -1;
        if (stalls == 0) {
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index t = 0; t < n; ++t) {
                if (!in_low(t)) continue;
                const double grad_diff = gmax + y[t] * G[t];
                if (grad_diff <= 0.0) continue;
                double quad = diag[i] + diag[t] - 2.0 * Ki[t];
                if (quad <= 0.0) quad = kTau;
                const double obj = -(grad_diff * grad_diff) / quad;
                if (obj < best) {
                    best = obj;
                    j = t;
                }
            }
        } else {
            std::vector<Eigen::Index> candidates;
            for (Eigen::Index t = 0; t < n; ++t)
                if (t != i && in_low(t) && gmax + y[t] * G[t] > 0.0) candidates.push_back(t);
            if (!candidates.empty()) j = candidates[rng.below(candidates.size())];
        }
        if (j < 0) break;

        const Eigen::VectorXd Ki_copy = Ki;  // the next row() call may evict Ki
        const Eigen::VectorXd& Kj = cache.row(j);
        const double old_ai = alpha[i], old_aj = alpha[j];
        double quad = diag[i] + diag[j] - 2.0 * Ki_copy[j];
        if (quad <= 0.0) quad = kTau;

        if (y[i] != y[j]) {
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            const double delta = (G[i] - G[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        ++iter;
        if (dai == 0.0 && daj == 0.0) {
            if (++stalls > 1) break;
            continue;
        }
        stalls = 0;
        // G_t += y_t (y_i dai K_ti + y_j daj K_tj)
        G.array() += y.array() * (y[i] * dai * Ki_copy.array() + y[j] * daj * Kj.array());
        if (opts.observer) opts.observer(alpha);
    }

    // Bias: mean of -y_t G_t over free vectors, else midpoint of the KKT interval.
    double bias_sum = 0.0;
    long n_free = 0;
    gmax = -std::numeric_limits<double>::infinity();
    gmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
        const double v = -y[t] * G[t];
        if (alpha[t] > 0.0 && alpha[t] < C) {
            bias_sum += v;
            ++n_free;
        }
        if (in_up(t)) gmax = std::max(gmax, v);
        if (in_low(t)) gmin = std::min(gmin, v);
    }

    KsvmModel m;
    m.bias = n_free > 0 ? bias_sum / static_cast<double>(n_free) : 0.5 * (gmax + gmin);
    m.kernel = opts.kernel;
    m.C = C;
    m.tol = opts.tol;
    m.converged = converged;
    m.iterations = iter;
    m.training_rows = static_cast<std::size_t>(n);

    std::vector<Eigen::Index> sv;
    for (Eigen::Index t = 0; t < n; ++t)
        if (alpha[t] > 0.0) sv.push_back(t);
    m.support_vectors = X(sv, Eigen::all);
    m.sv_labels = y(sv);
    m.alphas = alpha(sv);
    return m;
}

double decision(const KsvmModel& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != m.feature_count()) {
        throw ShapeError("input has " + std::to_string(x.size()) + " features, SVM expects " +
                         std::to_string(m.feature_count()));
    }
    Eigen::VectorXd k;
    if (m.kernel.kind == KernelKind::Linear) {
        k = m.support_vectors * x;
    } else {
        k = (-m.kernel.gamma * (m.support_vectors.rowwise() - x.transpose()).rowwise().squaredNorm().array()).exp().matrix();
    }
    return (m.alphas.array() * m.sv_labels.array() * k.array()).sum() + m.bias;
}

BinaryVerdict predict_binary(const KsvmModel& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
    return binary_from_decision(decision(m, x));
}

}  // namespace jamids

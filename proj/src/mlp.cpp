#include "jamids/mlp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "jamids/errors.hpp"
#include "jamids/random.hpp"

namespace jamids {

std::string_view to_string(Activation a) noexcept { return a == Activation::Relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view s) {
    if (s == "relu") return Activation::Relu;
    if (s == "tanh") return Activation::Tanh;
    throw ConfigError("unknown activation '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
}

MlpModel mlp_init(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed) {
    if (layer_sizes.size() < 3) throw ShapeError("an MLP needs at least one hidden layer");
    for (int s : layer_sizes)
        if (s < 1) throw ShapeError("layer sizes must be >= 1");
    if (layer_sizes.back() != kNumClasses) throw ShapeError("output layer must have 5 units");

    MlpModel m;
    m.layer_sizes = layer_sizes;
    m.hidden_activation = activation;
    m.rng_seed = seed;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Eigen::MatrixXd W(fan_out, fan_in);
        // Row-major fill so the draw order is independent of storage order.
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) W(r, c) = rng.uniform(-scale, scale);
        m.weights.push_back(std::move(W));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return m;
}

ClassProbs softmax(const ClassProbs& logits) {
    const ClassProbs e = (logits.array() - logits.maxCoeff()).exp().matrix();
    return e / e.sum();
}

namespace {

void apply_activation(Activation a, Eigen::MatrixXd& Z) {
    if (a == Activation::Relu)
        Z = Z.cwiseMax(0.0);
    else
        Z = Z.array().tanh().matrix();
}

// Derivative expressed through the activation output A.
Eigen::MatrixXd activation_grad(Activation a, const Eigen::MatrixXd& A) {
    if (a == Activation::Relu) return (A.array() > 0.0).cast<double>().matrix();
    return (1.0 - A.array().square()).matrix();
}

void check_input(const MlpModel& m, Eigen::Index cols) {
    if (cols != m.input_size()) {
        throw ShapeError("input has " + std::to_string(cols) + " features, model expects " +
                         std::to_string(m.input_size()));
    }
}

// Column-wise forward pass on X^T; acts[0] is the input, acts.back() the logits.
std::vector<Eigen::MatrixXd> forward_columns(const MlpModel& m, const Eigen::Ref<const Eigen::MatrixXd>& X) {
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(m.num_layers() + 1);
    acts.push_back(X.transpose());
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        Eigen::MatrixXd Z = m.weights[l] * acts.back();
        Z.colwise() += m.biases[l];
        if (l + 1 < m.num_layers()) apply_activation(m.hidden_activation, Z);
        acts.push_back(std::move(Z));
    }
    return acts;
}

// Stable column-wise log-softmax.
Eigen::MatrixXd log_softmax_columns(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
        const double mx = logits.col(j).maxCoeff();
        const double lse = mx + std::log((logits.col(j).array() - mx).exp().sum());
        out.col(j) = logits.col(j).array() - lse;
    }
    return out;
}

void check_labels(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<Label>& y) {
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw ShapeError("feature rows and label count differ");
}

double l2_penalty(const MlpModel& m, double l2) {
    if (l2 == 0.0) return 0.0;
    double s = 0.0;
    for (const auto& W : m.weights) s += W.squaredNorm();
    return 0.5 * l2 * s;
}

}  // namespace

ClassProbs forward(const MlpModel& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
    check_input(m, x.size());
    Eigen::VectorXd a = x;
    for (std::size_t l = 0; l < m.num_layers(); ++l) {
        Eigen::VectorXd z = m.weights[l] * a + m.biases[l];
        if (l + 1 < m.num_layers()) {
            Eigen::MatrixXd zm = z;
            apply_activation(m.hidden_activation, zm);
            z = zm;
        }
        a = std::move(z);
    }
    return softmax(a);
}

Eigen::MatrixXd forward_batch(const MlpModel& m, const Eigen::Ref<const Eigen::MatrixXd>& X) {
    check_input(m, X.cols());
    const auto acts = forward_columns(m, X);
    return log_softmax_columns(acts.back()).array().exp().matrix().transpose();
}

double mlp_loss(const MlpModel& m, const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<Label>& y,
                double l2) {
    check_input(m, X.cols());
    check_labels(X, y);
    if (y.empty()) return l2_penalty(m, l2);
    const auto acts = forward_columns(m, X);
    const Eigen::MatrixXd logp = log_softmax_columns(acts.back());
    double nll = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) nll -= logp(index_of(y[j]), static_cast<Eigen::Index>(j));
    return nll / static_cast<double>(y.size()) + l2_penalty(m, l2);
}

double mlp_loss_and_gradient(const MlpModel& m, const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const std::vector<Label>& y, double l2, MlpGradients& grad) {
    check_input(m, X.cols());
    check_labels(X, y);
    if (y.empty()) throw ShapeError("gradient of an empty batch");
    const auto n = static_cast<double>(y.size());
    const auto acts = forward_columns(m, X);
    const Eigen::MatrixXd logp = log_softmax_columns(acts.back());

    double nll = 0.0;
    Eigen::MatrixXd delta = logp.array().exp().matrix();  // P - Y, scaled below
    for (std::size_t j = 0; j < y.size(); ++j) {
        const auto c = static_cast<Eigen::Index>(j);
        nll -= logp(index_of(y[j]), c);
        delta(index_of(y[j]), c) -= 1.0;
    }
    delta /= n;

    const std::size_t L = m.num_layers();
    grad.weights.resize(L);
    grad.biases.resize(L);
    for (std::size_t l = L; l-- > 0;) {
        grad.weights[l] = delta * acts[l].transpose();
        if (l2 != 0.0) grad.weights[l] += l2 * m.weights[l];
        grad.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            delta = (m.weights[l].transpose() * delta).cwiseProduct(activation_grad(m.hidden_activation, acts[l]));
        }
    }
    return nll / n + l2_penalty(m, l2);
}

MlpTrainResult mlp_train(MlpModel m, const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<Label>& y,
                         const TrainConfig& cfg) {
    cfg.validate();
    check_input(m, X.cols());
    check_labels(X, y);
    {
        std::array<bool, kNumClasses> seen{};
        for (Label l : y) seen[static_cast<std::size_t>(index_of(l))] = true;
        if (std::count(seen.begin(), seen.end(), true) < 2) throw ConfigError("training labels cover fewer than two classes");
    }

    Rng rng(cfg.seed);
    std::vector<Eigen::Index> order(y.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    MlpTrainResult result;
    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
    MlpGradients grad;
    std::vector<Label> yb;
    Eigen::MatrixXd Xb;
    const auto n = static_cast<Eigen::Index>(y.size());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
            const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
            Xb.resize(len, X.cols());
            yb.resize(static_cast<std::size_t>(len));
            for (Eigen::Index i = 0; i < len; ++i) {
                const auto src = order[static_cast<std::size_t>(start + i)];
                Xb.row(i) = X.row(src);
                yb[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(src)];
            }
            mlp_loss_and_gradient(m, Xb, yb, cfg.l2, grad);
            for (std::size_t l = 0; l < m.num_layers(); ++l) {
                m.weights[l] -= cfg.learning_rate * grad.weights[l];
                m.biases[l] -= cfg.learning_rate * grad.biases[l];
            }
        }
        const double loss = mlp_loss(m, X, y, cfg.l2);
        if (!std::isfinite(loss)) throw NonFiniteError(epoch + 1, "training loss is not finite");
        result.loss_history.push_back(loss);
    }
    result.model = std::move(m);
    return result;
}

Label argmax_label(const ClassProbs& probs) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (probs[c] > probs[best]) best = c;
    return static_cast<Label>(best);
}

MlpPrediction mlp_predict(const MlpModel& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
    MlpPrediction p;
    p.probs = forward(m, x);
    p.label = argmax_label(p.probs);
    return p;
}

}  // namespace jamids

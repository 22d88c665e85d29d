#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jamids/label.hpp"

namespace jamids {

enum class Activation { Relu, Tanh };

std::string_view to_string(Activation a) noexcept;
Activation parse_activation(std::string_view s);

using ClassProbs = Eigen::Matrix<double, kNumClasses, 1>;

// Feed-forward net: hidden layers use `hidden_activation`, the output layer is a
// five-way softmax in Label index order.
struct MlpModel {
    std::vector<int> layer_sizes;
    std::vector<Eigen::MatrixXd> weights;  // weights[l] is sizes[l+1] x sizes[l]
    std::vector<Eigen::VectorXd> biases;
    Activation hidden_activation = Activation::Relu;
    std::uint64_t rng_seed = 0;

    int input_size() const { return layer_sizes.front(); }
    std::size_t num_layers() const { return weights.size(); }
    bool operator==(const MlpModel&) const = default;
};

struct TrainConfig {
    double learning_rate = 0.05;
    int batch_size = 64;
    int epochs = 20;
    std::uint64_t seed = 0;
    double l2 = 0.0;

    // Throws ConfigError. A learning rate of exactly zero is accepted (weights stay put).
    void validate() const;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
MlpModel mlp_init(const std::vector<int>& layer_sizes, Activation activation, std::uint64_t seed);

ClassProbs softmax(const ClassProbs& logits);

ClassProbs forward(const MlpModel& m, const Eigen::Ref<const Eigen::VectorXd>& x);

// Rows of X are samples; returns n x 5 probabilities.
Eigen::MatrixXd forward_batch(const MlpModel& m, const Eigen::Ref<const Eigen::MatrixXd>& X);

struct MlpGradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// Mean cross-entropy over the rows of X plus (l2/2) * sum of squared weights.
double mlp_loss(const MlpModel& m, const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<Label>& y,
                double l2 = 0.0);

// Same loss, with its exact gradient written to `grad`.
double mlp_loss_and_gradient(const MlpModel& m, const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const std::vector<Label>& y, double l2, MlpGradients& grad);

struct MlpTrainResult {
    MlpModel model;
    std::vector<double> loss_history;  // full training loss after each epoch
};

// Mini-batch SGD; the batch order is reshuffled every epoch from cfg.seed.
MlpTrainResult mlp_train(MlpModel m, const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<Label>& y,
                         const TrainConfig& cfg);

// Argmax with ties to the lowest index.
Label argmax_label(const ClassProbs& probs);

struct MlpPrediction {
    Label label = Label::Normal;
    ClassProbs probs = ClassProbs::Zero();
};

MlpPrediction mlp_predict(const MlpModel& m, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace jamids

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jamids/dataset.hpp"
#include "jamids/features.hpp"
#include "jamids/ksvm.hpp"
#include "jamids/mlp.hpp"

namespace jamids {

struct SvmConfig {
    double C = 1.0;
    KernelKind kernel = KernelKind::Rbf;
    // Unset: 1 / (k * variance of the selected training features).
    std::optional<double> gamma;
    double tol = 1e-3;
    int max_passes = 1000;
    std::size_t subsample_cap = 20000;
    double cache_mb = 256.0;
};

struct PipelineConfig {
    std::vector<int> hidden_layers = {64};
    Activation activation = Activation::Relu;
    TrainConfig mlp{.learning_rate = 0.1, .batch_size = 64, .epochs = 20, .seed = 0, .l2 = 0.03};  // seed overwritten from `seed`
    SvmConfig svm;
    int fs_k = 10;
    // Principal components kept for ranking: smallest count reaching this share of variance.
    double pca_variance = 0.65;
    std::uint64_t seed = 7;
};

struct PipelineMetadata {
    std::uint64_t seed = 0;
    std::uint64_t mlp_init_seed = 0;
    std::uint64_t mlp_train_seed = 0;
    std::uint64_t svm_subsample_seed = 0;
    std::uint64_t svm_solver_seed = 0;
    std::string dataset_hash;
    std::size_t train_rows = 0;
    ClassCounts train_class_counts{};
    int pca_components = 0;
    FeatureRanking ranking;
    std::vector<double> mlp_loss_history;
    double svm_gamma = 0.0;
};

// Scale -> select columns -> MLP (five classes) -> SVM re-check of Normal verdicts.
struct PipelineModel {
    std::vector<std::string> column_names;  // all 23, canonical order
    Scaler scaler;
    std::vector<int> selected_columns;
    MlpModel mlp;
    KsvmModel ksvm;
    PipelineConfig config;
    PipelineMetadata metadata;

    // Throws ShapeError when the sub-models disagree on the feature count.
    void check_consistency() const;
    // Scaled, column-selected input for both stages.
    Eigen::VectorXd prepare(const FeatureVector& raw) const;
};

// Requires every class present. `dataset_hash` defaults to a digest of the CSV form.
PipelineModel train_pipeline(const Dataset& train, const PipelineConfig& cfg, std::string dataset_hash = {});

struct Verdict {
    Label final_label = Label::Normal;
    Label stage1_label = Label::Normal;
    ClassProbs stage1_probs = ClassProbs::Zero();
    bool stage2_invoked = false;
    std::optional<double> stage2_decision;

    bool operator==(const Verdict&) const = default;
};

// Most likely of the four attack classes (ties to the lowest index).
Label most_likely_attack(const ClassProbs& probs);

// Second-stage rule applied to a Normal first-stage verdict.
Verdict combine_stages(const ClassProbs& stage1_probs, std::optional<double> stage2_decision);

Verdict classify(const PipelineModel& p, const FeatureRecord& rec);
Verdict classify(const PipelineModel& p, const FeatureVector& raw);

// Attack scores for ROC curves: 1 - P(Normal) for the MLP alone; for the pipeline
// the same when stage 2 was skipped, else max(1 - P(Normal), sigmoid(decision)).
double mlp_attack_score(const Verdict& v);
double pipeline_attack_score(const Verdict& v);

struct BatchResult {
    std::vector<Verdict> verdicts;
    double seconds = 0.0;
    double records_per_second = 0.0;
};

BatchResult classify_batch(const PipelineModel& p, const Dataset& ds);

}  // namespace jamids

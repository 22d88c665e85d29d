#include "jamids/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "jamids/errors.hpp"
#include "jamids/hash.hpp"
#include "jamids/random.hpp"

namespace jamids {

void PipelineModel::check_consistency() const {
    const auto k = static_cast<int>(selected_columns.size());
    if (k < 1) throw ShapeError("pipeline has no selected columns");
    for (int c : selected_columns)
        if (c < 0 || c >= kNumFeatures) throw ShapeError("selected column out of range");
    if (mlp.input_size() != k) throw ShapeError("MLP input size does not match the selected columns");
    if (ksvm.feature_count() != k) throw ShapeError("SVM feature count does not match the selected columns");
}

Eigen::VectorXd PipelineModel::prepare(const FeatureVector& raw) const {
    const FeatureVector z = scaler.transform(raw);
    return z(selected_columns);
}

namespace {

Eigen::VectorXd binary_targets(const Dataset& ds) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(ds.size()));
    for (std::size_t i = 0; i < ds.size(); ++i) y[static_cast<Eigen::Index>(i)] = is_attack(ds[i].label) ? 1.0 : -1.0;
    return y;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

PipelineModel train_pipeline(const Dataset& train, const PipelineConfig& cfg, std::string dataset_hash) {
    for (Label l : kAllLabels) {
        if (train.class_counts()[static_cast<std::size_t>(index_of(l))] == 0)
            throw EmptyClassError("training data has no '" + std::string(to_string(l)) + "' records");
    }
    if (cfg.fs_k < 1 || cfg.fs_k > kNumFeatures) throw RankError("fs_k must lie in 1..23");
    if (!(cfg.pca_variance > 0.0 && cfg.pca_variance <= 1.0)) throw ConfigError("pca_variance must lie in (0, 1]");

    PipelineModel p;
    p.config = cfg;
    p.column_names = train.column_names();
    auto& meta = p.metadata;
    meta.seed = cfg.seed;
    meta.mlp_init_seed = derive_seed(cfg.seed, Stream::MlpInit);
    meta.mlp_train_seed = derive_seed(cfg.seed, Stream::MlpTrain);
    meta.svm_subsample_seed = derive_seed(cfg.seed, Stream::SvmSubsample);
    meta.svm_solver_seed = derive_seed(cfg.seed, Stream::SvmSolver);
    meta.dataset_hash = dataset_hash.empty() ? sha256_hex(to_csv(train)) : std::move(dataset_hash);
    meta.train_rows = train.size();
    meta.train_class_counts = train.class_counts();

    // Scaling and PCA-driven column selection.
    p.scaler = fit_scaler(train);
    const Eigen::MatrixXd Z = p.scaler.transform(train);
    const auto full = pca_fit(Z, kNumFeatures);
    const auto kept = components_for_variance(full.explained_variance, cfg.pca_variance);
    PcaModel<double> truncated;
    truncated.components = full.components.topRows(kept);
    truncated.explained_variance = full.explained_variance.head(kept);
    truncated.column_means = full.column_means;
    meta.pca_components = static_cast<int>(kept);
    meta.ranking = rank_features(truncated);
    p.selected_columns = top_k_columns(meta.ranking, cfg.fs_k);
    const Eigen::MatrixXd X = select_columns(Z, p.selected_columns);

    // Stage 1.
    std::vector<int> sizes = {cfg.fs_k};
    sizes.insert(sizes.end(), cfg.hidden_layers.begin(), cfg.hidden_layers.end());
    sizes.push_back(kNumClasses);
    TrainConfig mlp_cfg = cfg.mlp;
    mlp_cfg.seed = meta.mlp_train_seed;
    p.config.mlp.seed = mlp_cfg.seed;
    auto trained = mlp_train(mlp_init(sizes, cfg.activation, meta.mlp_init_seed), X, train.labels(), mlp_cfg);
    p.mlp = std::move(trained.model);
    meta.mlp_loss_history = std::move(trained.loss_history);

    // Stage 2 on the binary collapse of a capped stratified subsample.
    const Dataset svm_rows = stratified_subsample(train, cfg.svm.subsample_cap, meta.svm_subsample_seed);
    const Eigen::MatrixXd Xs = select_columns(p.scaler.transform(svm_rows), p.selected_columns);
    SmoOptions smo;
    smo.C = cfg.svm.C;
    smo.kernel.kind = cfg.svm.kernel;
    if (cfg.svm.gamma) {
        smo.kernel.gamma = *cfg.svm.gamma;
    } else {
        const double mean = Xs.mean();
        const double var = (Xs.array() - mean).square().mean();
        smo.kernel.gamma = var > 0.0 ? 1.0 / (static_cast<double>(cfg.fs_k) * var) : 1.0 / cfg.fs_k;
    }
    meta.svm_gamma = smo.kernel.gamma;
    smo.tol = cfg.svm.tol;
    smo.max_passes = cfg.svm.max_passes;
    smo.cache_mb = cfg.svm.cache_mb;
    smo.seed = meta.svm_solver_seed;
    p.ksvm = train_smo(Xs, binary_targets(svm_rows), smo);
    p.ksvm.subsample_cap = cfg.svm.subsample_cap;
    p.ksvm.subsample_seed = meta.svm_subsample_seed;

    p.check_consistency();
    return p;
}

Label most_likely_attack(const ClassProbs& probs) {
    int best = index_of(Label::ConstantJamming);
    for (int c = best + 1; c < kNumClasses; ++c)
        if (probs[c] > probs[best]) best = c;
    return static_cast<Label>(best);
}

Verdict combine_stages(const ClassProbs& stage1_probs, std::optional<double> stage2_decision) {
    Verdict v;
    v.stage1_probs = stage1_probs;
    v.stage1_label = argmax_label(stage1_probs);
    if (v.stage1_label != Label::Normal) {
        v.final_label = v.stage1_label;
        return v;
    }
    if (!stage2_decision) throw ShapeError("a Normal first-stage verdict needs a second-stage decision");
    v.stage2_invoked = true;
    v.stage2_decision = stage2_decision;
    v.final_label = binary_from_decision(*stage2_decision) == BinaryVerdict::Attack ? most_likely_attack(stage1_probs)
                                                                                   : Label::Normal;
    return v;
}

Verdict classify(const PipelineModel& p, const FeatureVector& raw) {
    const Eigen::VectorXd x = p.prepare(raw);
    const ClassProbs probs = forward(p.mlp, x);
    if (argmax_label(probs) != Label::Normal) return combine_stages(probs, std::nullopt);
    return combine_stages(probs, decision(p.ksvm, x));
}

Verdict classify(const PipelineModel& p, const FeatureRecord& rec) { return classify(p, rec.values); }

double mlp_attack_score(const Verdict& v) { return 1.0 - v.stage1_probs[index_of(Label::Normal)]; }

double pipeline_attack_score(const Verdict& v) {
    const double s1 = mlp_attack_score(v);
    if (!v.stage2_invoked) return s1;
    return std::max(s1, sigmoid(*v.stage2_decision));
}

BatchResult classify_batch(const PipelineModel& p, const Dataset& ds) {
    p.check_consistency();
    BatchResult out;
    out.verdicts.reserve(ds.size());
    const auto start = std::chrono::steady_clock::now();
    for (const auto& rec : ds.records()) out.verdicts.push_back(classify(p, rec));
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.records_per_second = out.seconds > 0.0 ? static_cast<double>(ds.size()) / out.seconds : 0.0;
    return out;
}

}  // namespace jamids

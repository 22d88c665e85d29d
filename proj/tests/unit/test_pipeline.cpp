#include <doctest.h>

#include "jamids/errors.hpp"
#include "jamids/metrics.hpp"
#include "jamids/pipeline.hpp"
#include "jamids/random.hpp"
#include "jamids/serialize.hpp"
#include "jamids/simulator.hpp"
#include "../support.hpp"

using namespace jamids;

namespace {

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.hidden_layers = {16};
    cfg.mlp.epochs = 10;
    cfg.svm.subsample_cap = 600;
    cfg.seed = 3;
    return cfg;
}

const Dataset& blobs() {
    static const Dataset ds = testing::five_class_blobs({600, 150, 120, 90, 60}, 21);
    return ds;
}

const PipelineModel& blob_model() {
    static const PipelineModel p = train_pipeline(blobs(), small_config());
    return p;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("a confident attack verdict skips stage 2") {
    ClassProbs p;
    p << 0.1, 0.6, 0.1, 0.1, 0.1;
    auto v = combine_stages(p, std::nullopt);
    CHECK(v.final_label == Label::ConstantJamming);
    CHECK(v.stage1_label == Label::ConstantJamming);
    CHECK_FALSE(v.stage2_invoked);
    CHECK_FALSE(v.stage2_decision.has_value());
    // A decision offered for a non-Normal verdict is ignored.
    CHECK(combine_stages(p, 5.0) == v);
}

TEST_CASE("stage 2 confirms Normal on a negative decision") {
    ClassProbs p;
    p << 0.6, 0.25, 0.05, 0.05, 0.05;
    auto v = combine_stages(p, -2.0);
    CHECK(v.final_label == Label::Normal);
    CHECK(v.stage2_invoked);
    CHECK(*v.stage2_decision == -2.0);
}

TEST_CASE("stage 2 override takes the most likely attack class") {
    ClassProbs p;
    p << 0.60, 0.25, 0.05, 0.05, 0.05;
    auto v = combine_stages(p, 1.0);
    CHECK(v.stage1_label == Label::Normal);
    CHECK(v.final_label == Label::ConstantJamming);
    p << 0.60, 0.1, 0.1, 0.1, 0.1;
    CHECK(combine_stages(p, 0.0).final_label == Label::ConstantJamming);  // tie to lowest, decision 0 is an attack
    p << 0.52, 0.02, 0.02, 0.4, 0.04;
    CHECK(combine_stages(p, 0.3).final_label == Label::DeceptiveJamming);
    CHECK_THROWS_AS(combine_stages(p, std::nullopt), ShapeError);
}

TEST_CASE("training with a missing class fails") {
    auto ds = testing::five_class_blobs({50, 20, 20, 0, 20}, 1);
    CHECK_THROWS_AS(train_pipeline(ds, small_config()), EmptyClassError);
}

TEST_CASE("trained model shape") {
    const auto& p = blob_model();
    CHECK(p.selected_columns.size() == 10);
    CHECK(p.mlp.input_size() == 10);
    CHECK(p.ksvm.feature_count() == 10);
    CHECK(p.ksvm.training_rows <= 600);
    CHECK(p.metadata.mlp_loss_history.size() == 10);
    CHECK(p.metadata.train_rows == blobs().size());
    CHECK(p.scaler.fitted_on == blobs().size());
    CHECK_NOTHROW(p.check_consistency());

    auto broken = p;
    broken.selected_columns.pop_back();
    CHECK_THROWS_AS(broken.check_consistency(), ShapeError);
}

TEST_CASE("identical inputs give a byte-identical serialized model") {
    auto again = train_pipeline(blobs(), small_config());
    CHECK(dump(to_json(again)) == dump(to_json(blob_model())));
    auto other = small_config();
    other.seed = 4;
    CHECK(dump(to_json(train_pipeline(blobs(), other))) != dump(to_json(blob_model())));
}

TEST_CASE("verdicts are consistent and batch equals per-record") {
    const auto test = testing::five_class_blobs({300, 80, 60, 40, 30}, 99);
    const auto& p = blob_model();
    auto batch = classify_batch(p, test);
    REQUIRE(batch.verdicts.size() == test.size());
    CHECK(batch.seconds >= 0.0);
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto& v = batch.verdicts[i];
        CHECK(v == classify(p, test[i]));
        CHECK(v == classify(p, test[i].values));
        CHECK(v.stage2_invoked == (v.stage1_label == Label::Normal));
        CHECK(v.stage2_decision.has_value() == v.stage2_invoked);
        if (!v.stage2_invoked) CHECK(v.final_label == v.stage1_label);
        CHECK(std::abs(v.stage1_probs.sum() - 1.0) < 1e-9);
    }
    CHECK(classify_batch(p, Dataset{}).verdicts.empty());
}

TEST_CASE("stage 2 never turns an attack verdict into Normal") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto test = testing::five_class_blobs({300, 80, 60, 40, 30}, 1000 + seed, 1.0 + 0.5 * static_cast<double>(seed));
        auto batch = classify_batch(blob_model(), test);
        std::int64_t fn1 = 0, fn2 = 0, overrides = 0;
        for (std::size_t i = 0; i < test.size(); ++i) {
            const auto& v = batch.verdicts[i];
            if (v.final_label != v.stage1_label) ++overrides;
            if (!is_attack(test[i].label)) continue;
            const bool missed1 = v.stage1_label == Label::Normal, missed2 = v.final_label == Label::Normal;
            if (missed2) CHECK(missed1);
            fn1 += missed1;
            fn2 += missed2;
        }
        CHECK(fn2 <= fn1);
        if (overrides == 0) CHECK(fn2 == fn1);
    }
}

TEST_CASE("attack scores follow the documented rule") {
    Verdict v;
    v.stage1_probs << 0.7, 0.1, 0.1, 0.05, 0.05;
    CHECK(mlp_attack_score(v) == doctest::Approx(0.3));
    CHECK(pipeline_attack_score(v) == doctest::Approx(0.3));
    v.stage2_invoked = true;
    v.stage2_decision = 2.0;
    CHECK(pipeline_attack_score(v) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
    v.stage2_decision = -5.0;
    CHECK(pipeline_attack_score(v) == doctest::Approx(0.3));
}

TEST_CASE("simulated default dataset: held-out accuracy at least 0.95") {
    const auto ds = generate_dataset(LeachConfig{}, default_jammers());
    auto [train, test] = stratified_split(ds, 0.7, derive_seed(7, Stream::Split));
    const auto p = train_pipeline(train, PipelineConfig{});
    auto batch = classify_batch(p, test);
    std::vector<Label> fin;
    for (const auto& v : batch.verdicts) fin.push_back(v.final_label);
    const auto r = rates(confusion(test.labels(), fin));
    MESSAGE("pipeline accuracy " << *r.accuracy);
    CHECK(*r.accuracy >= 0.95);
}

}  // TEST_SUITE

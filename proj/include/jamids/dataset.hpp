#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jamids/label.hpp"

namespace jamids {

inline constexpr int kNumFeatures = 23;
inline constexpr int kNumNamedFeatures = 10;
inline constexpr int kNumExtraFeatures = kNumFeatures - kNumNamedFeatures;

using FeatureVector = Eigen::Matrix<double, kNumFeatures, 1>;

// Slot of each named feature in the canonical vector; extras follow at 10..22.
enum class Feature : int {
    EnergyConsumed = 0,
    IsCh = 1,
    AdvChSent = 2,
    AdvSchSent = 3,
    DataSentToBs = 4,
    DistChToBs = 5,
    DataReceived = 6,
    AdvChReceived = 7,
    JoinReqReceived = 8,
    Time = 9,
};

// Canonical header for each named slot.
const std::array<std::string, kNumNamedFeatures>& named_feature_names();

// One node-round observation.
struct FeatureRecord {
    FeatureVector values = FeatureVector::Zero();
    Label label = Label::Normal;

    double operator[](Feature f) const { return values[static_cast<int>(f)]; }
    double& operator[](Feature f) { return values[static_cast<int>(f)]; }

    double energy_consumed() const { return (*this)[Feature::EnergyConsumed]; }
    bool is_ch() const { return (*this)[Feature::IsCh] != 0.0; }
    double adv_ch_sent() const { return (*this)[Feature::AdvChSent]; }
    double adv_sch_sent() const { return (*this)[Feature::AdvSchSent]; }
    double data_sent_to_bs() const { return (*this)[Feature::DataSentToBs]; }
    double dist_ch_to_bs() const { return (*this)[Feature::DistChToBs]; }
    double data_received() const { return (*this)[Feature::DataReceived]; }
    double adv_ch_received() const { return (*this)[Feature::AdvChReceived]; }
    double join_req_received() const { return (*this)[Feature::JoinReqReceived]; }
    double time() const { return (*this)[Feature::Time]; }
    auto extra_features() const { return values.tail<kNumExtraFeatures>(); }

    bool operator==(const FeatureRecord& o) const { return label == o.label && values == o.values; }
};

// Throws SchemaError naming the first violated domain rule (count < 0, is_ch not 0/1, ...).
void validate_record(const FeatureRecord& rec);

using ClassCounts = std::array<std::size_t, kNumClasses>;

class Dataset {
public:
    Dataset();
    Dataset(std::vector<std::string> column_names, std::vector<FeatureRecord> records,
            bool labeled = true);

    const std::vector<std::string>& column_names() const noexcept { return column_names_; }
    const std::vector<FeatureRecord>& records() const noexcept { return records_; }
    const ClassCounts& class_counts() const noexcept { return class_counts_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    bool labeled() const noexcept { return labeled_; }
    const FeatureRecord& operator[](std::size_t i) const { return records_[i]; }

    // n x 23 design matrix in canonical column order.
    Eigen::MatrixXd matrix() const;
    std::vector<Label> labels() const;

    // Same columns, chosen rows (in the given order).
    Dataset subset(const std::vector<std::size_t>& rows) const;

    bool operator==(const Dataset& o) const {
        return column_names_ == o.column_names_ && records_ == o.records_ && labeled_ == o.labeled_;
    }

private:
    std::vector<std::string> column_names_;
    std::vector<FeatureRecord> records_;
    ClassCounts class_counts_{};
    bool labeled_ = true;
};

// Canonical simulator/writer column names: 10 named features then aux_0..aux_12.
std::vector<std::string> default_column_names();

struct CsvOptions {
    // Normalized header names accepted for the label column.
    std::vector<std::string> label_aliases = {"label", "attack type", "attack", "class"};
    const LabelMap* label_map = nullptr;
    // When false a missing label column yields an unlabeled dataset (all Normal placeholders).
    bool require_label = true;
};

Dataset load_csv(const std::string& path, const CsvOptions& opts = {});
Dataset parse_csv(const std::string& text, const CsvOptions& opts = {});

// Writes the canonical column order; doubles use shortest round-trip form.
std::string to_csv(const Dataset& ds);
void write_csv(const Dataset& ds, const std::string& path);

// Per class, train gets round-half-up(ratio * count) rows chosen by a seeded
// shuffle; both halves keep the input's relative order.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_ratio,
                                             std::uint64_t seed);

// Seeded stratified subsample of at most `cap` rows, per-class counts proportional.
Dataset stratified_subsample(const Dataset& ds, std::size_t cap, std::uint64_t seed);

// Z-score standardization (population std). Zero-variance columns map to 0.
struct Scaler {
    FeatureVector means = FeatureVector::Zero();
    FeatureVector stds = FeatureVector::Ones();
    std::size_t fitted_on = 0;

    FeatureVector transform(const FeatureVector& x) const;
    FeatureVector transform(const FeatureRecord& rec) const { return transform(rec.values); }
    Eigen::MatrixXd transform(const Dataset& ds) const;  // n x 23
};

Scaler fit_scaler(const Dataset& ds);

}  // namespace jamids

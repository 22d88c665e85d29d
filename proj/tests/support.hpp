#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jamids/dataset.hpp"
#include "jamids/random.hpp"

namespace testing {

// Records whose time column carries the row index, so rows stay identifiable.
inline jamids::Dataset labeled_rows(const std::vector<jamids::Label>& labels, std::uint64_t seed = 1) {
    jamids::Rng rng(seed);
    std::vector<jamids::FeatureRecord> recs;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        jamids::FeatureRecord r;
        for (int c = 0; c < jamids::kNumFeatures; ++c) r.values[c] = rng.uniform(0.0, 10.0);
        r[jamids::Feature::IsCh] = rng.uniform() < 0.1 ? 1.0 : 0.0;
        r[jamids::Feature::Time] = static_cast<double>(i);
        r.label = labels[i];
        recs.push_back(r);
    }
    return jamids::Dataset(jamids::default_column_names(), std::move(recs));
}

// Five overlapping Gaussian classes: class c shifts column c + 10 (and column 2 for
// every attack), the remaining columns are noise.
inline jamids::Dataset five_class_blobs(const std::vector<std::size_t>& per_class, std::uint64_t seed,
                                        double shift = 2.0) {
    jamids::Rng rng(seed);
    std::vector<jamids::FeatureRecord> recs;
    for (int c = 0; c < jamids::kNumClasses; ++c) {
        for (std::size_t i = 0; i < per_class[static_cast<std::size_t>(c)]; ++i) {
            jamids::FeatureRecord r;
            for (int j = 0; j < jamids::kNumFeatures; ++j) r.values[j] = rng.normal();
            r[jamids::Feature::IsCh] = rng.uniform() < 0.1 ? 1.0 : 0.0;
            for (auto f : {jamids::Feature::AdvChSent, jamids::Feature::AdvSchSent, jamids::Feature::DataSentToBs,
                           jamids::Feature::DistChToBs, jamids::Feature::DataReceived, jamids::Feature::AdvChReceived,
                           jamids::Feature::JoinReqReceived})
                r[f] = std::abs(r[f]);
            if (c > 0) {
                r.values[10 + c] += shift;
                r[jamids::Feature::AdvSchSent] += shift;
            }
            r.label = jamids::label_from_index(c);
            recs.push_back(r);
        }
    }
    return jamids::Dataset(jamids::default_column_names(), std::move(recs));
}

inline std::vector<jamids::Label> repeat(jamids::Label l, std::size_t n) { return std::vector<jamids::Label>(n, l); }

inline std::vector<jamids::Label> concat(std::vector<jamids::Label> a, const std::vector<jamids::Label>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("jamids_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing

#include "jamids/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "jamids/errors.hpp"
#include "jamids/random.hpp"

namespace jamids {

const std::array<std::string, kNumNamedFeatures>& named_feature_names() {
    static const std::array<std::string, kNumNamedFeatures> names = {
        "energy_consumed", "is_ch",         "adv_ch_sent",     "adv_sch_sent",      "data_sent_to_bs",
        "dist_ch_to_bs",   "data_received", "adv_ch_received", "join_req_received", "time"};
    return names;
}

std::vector<std::string> default_column_names() {
    std::vector<std::string> names(named_feature_names().begin(), named_feature_names().end());
    for (int i = 0; i < kNumExtraFeatures; ++i) names.push_back("aux_" + std::to_string(i));
    return names;
}

namespace {

// Returns the canonical slot of the first domain violation, or -1.
int domain_violation(const FeatureRecord& rec) {
    const double is_ch = rec[Feature::IsCh];
    if (is_ch != 0.0 && is_ch != 1.0) return static_cast<int>(Feature::IsCh);
    for (Feature f : {Feature::AdvChSent, Feature::AdvSchSent, Feature::DataSentToBs, Feature::DataReceived,
                      Feature::AdvChReceived, Feature::JoinReqReceived, Feature::DistChToBs}) {
        if (!(rec[f] >= 0.0)) return static_cast<int>(f);
    }
    return -1;
}

// Header alias table for the named features (normalized form).
const std::array<std::vector<std::string>, kNumNamedFeatures>& feature_aliases() {
    static const std::array<std::vector<std::string>, kNumNamedFeatures> aliases = {{
        {"energy consumed", "energy consumption", "expaned energy", "expanded energy", "energy"},
        {"is ch"},
        {"adv ch sent", "adv ch send", "adv s"},
        {"adv sch sent", "adv sch send", "sch s"},
        {"data sent to bs"},
        {"dist ch to bs"},
        {"data received", "data r"},
        {"adv ch received", "adv ch receives", "adv r"},
        {"join req received", "join req receive", "join r"},
        {"time"},
    }};
    return aliases;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos) pos = text.size();
        auto line = text.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = pos + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

void append_double(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

void validate_record(const FeatureRecord& rec) {
    const int slot = domain_violation(rec);
    if (slot >= 0) {
        throw SchemaError("feature '" + named_feature_names()[static_cast<std::size_t>(slot)] +
                          "' out of domain");
    }
}

Dataset::Dataset() : column_names_(default_column_names()) {}

Dataset::Dataset(std::vector<std::string> column_names, std::vector<FeatureRecord> records, bool labeled)
    : column_names_(std::move(column_names)), records_(std::move(records)), labeled_(labeled) {
    if (column_names_.size() != static_cast<std::size_t>(kNumFeatures)) {
        throw SchemaError("expected 23 column names, got " + std::to_string(column_names_.size()));
    }
    for (const auto& r : records_) ++class_counts_[static_cast<std::size_t>(index_of(r.label))];
}

Eigen::MatrixXd Dataset::matrix() const {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(records_.size()), kNumFeatures);
    for (std::size_t i = 0; i < records_.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = records_[i].values.transpose();
    return X;
}

std::vector<Label> Dataset::labels() const {
    std::vector<Label> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.label);
    return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    std::vector<FeatureRecord> recs;
    recs.reserve(rows.size());
    for (auto i : rows) recs.push_back(records_.at(i));
    return Dataset(column_names_, std::move(recs), labeled_);
}

Dataset parse_csv(const std::string& text, const CsvOptions& opts) {
    std::string_view body(text);
    if (body.starts_with("\xEF\xBB\xBF")) body.remove_prefix(3);
    const auto lines = split_lines(body);
    if (lines.empty()) throw SchemaError("missing header row");

    const auto header = split_commas(lines[0]);
    std::vector<std::string> norm;
    for (auto h : header) norm.push_back(normalize_token(h));

    int label_col = -1;
    for (const auto& alias : opts.label_aliases) {
        const auto a = normalize_token(alias);
        auto it = std::find(norm.begin(), norm.end(), a);
        if (it != norm.end()) {
            label_col = static_cast<int>(it - norm.begin());
            break;
        }
    }
    if (label_col < 0 && opts.require_label) throw SchemaError("no label column found in header");

    std::vector<int> feature_cols;
    for (int c = 0; c < static_cast<int>(header.size()); ++c)
        if (c != label_col) feature_cols.push_back(c);
    if (feature_cols.size() != static_cast<std::size_t>(kNumFeatures)) {
        throw SchemaError("expected 23 feature columns, found " + std::to_string(feature_cols.size()));
    }

    // slot_to_col[s] = input column feeding canonical slot s.
    std::array<int, kNumFeatures> slot_to_col;
    slot_to_col.fill(-1);
    std::vector<bool> used(header.size(), false);
    for (int s = 0; s < kNumNamedFeatures; ++s) {
        for (const auto& alias : feature_aliases()[static_cast<std::size_t>(s)]) {
            for (int c : feature_cols) {
                if (!used[static_cast<std::size_t>(c)] && norm[static_cast<std::size_t>(c)] == alias) {
                    slot_to_col[static_cast<std::size_t>(s)] = c;
                    used[static_cast<std::size_t>(c)] = true;
                    break;
                }
            }
            if (slot_to_col[static_cast<std::size_t>(s)] >= 0) break;
        }
    }
    {
        std::size_t s = 0;
        for (int c : feature_cols) {
            if (used[static_cast<std::size_t>(c)]) continue;
            while (slot_to_col[s] >= 0) ++s;
            slot_to_col[s] = c;
        }
    }

    std::vector<std::string> names;
    for (int s = 0; s < kNumFeatures; ++s) names.emplace_back(header[static_cast<std::size_t>(slot_to_col[static_cast<std::size_t>(s)])]);

    std::vector<FeatureRecord> records;
    records.reserve(lines.size() - 1);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t row = li;
        const auto cells = split_commas(lines[li]);
        if (cells.size() != header.size()) {
            throw ParseError(row, cells.size(), "expected " + std::to_string(header.size()) + " cells, got " +
                                                    std::to_string(cells.size()));
        }
        FeatureRecord rec;
        for (int s = 0; s < kNumFeatures; ++s) {
            const auto c = static_cast<std::size_t>(slot_to_col[static_cast<std::size_t>(s)]);
            const auto cell = cells[c];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
                throw ParseError(row, c, "non-numeric cell '" + std::string(cell) + "'");
            }
            rec.values[s] = v;
        }
        if (label_col >= 0) {
            const auto raw = cells[static_cast<std::size_t>(label_col)];
            auto l = parse_label(raw, opts.label_map);
            if (!l) throw ParseError(row, static_cast<std::size_t>(label_col), "unknown label '" + std::string(raw) + "'");
            rec.label = *l;
        }
        if (const int slot = domain_violation(rec); slot >= 0) {
            throw ParseError(row, static_cast<std::size_t>(slot_to_col[static_cast<std::size_t>(slot)]),
                             "value out of domain for " + named_feature_names()[static_cast<std::size_t>(slot)]);
        }
        records.push_back(rec);
    }
    return Dataset(std::move(names), std::move(records), label_col >= 0);
}

Dataset load_csv(const std::string& path, const CsvOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path);
    return parse_csv(ss.str(), opts);
}

std::string to_csv(const Dataset& ds) {
    std::string out;
    out.reserve(ds.size() * 200 + 512);
    for (std::size_t c = 0; c < ds.column_names().size(); ++c) {
        if (c) out.push_back(',');
        out += ds.column_names()[c];
    }
    if (ds.labeled()) out += ",label";
    out.push_back('\n');
    for (const auto& r : ds.records()) {
        for (int c = 0; c < kNumFeatures; ++c) {
            if (c) out.push_back(',');
            append_double(out, r.values[c]);
        }
        if (ds.labeled()) {
            out.push_back(',');
            out += to_string(r.label);
        }
        out.push_back('\n');
    }
    return out;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    const auto text = to_csv(ds);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path);
}

namespace {

std::array<std::vector<std::size_t>, kNumClasses> rows_by_class(const Dataset& ds) {
    std::array<std::vector<std::size_t>, kNumClasses> by_class;
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[static_cast<std::size_t>(index_of(ds[i].label))].push_back(i);
    return by_class;
}

}  // namespace

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, double train_ratio, std::uint64_t seed) {
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw ConfigError("train_ratio must lie in (0, 1)");
    if (ds.empty()) throw EmptyClassError("cannot split a dataset with no records");

    Rng rng(seed);
    std::vector<std::size_t> train_rows, test_rows;
    for (auto& rows : rows_by_class(ds)) {
        if (rows.empty()) continue;
        const auto n = rows.size();
        const auto n_train = std::min<std::size_t>(
            n, static_cast<std::size_t>(std::floor(train_ratio * static_cast<double>(n) + 0.5)));
        auto shuffled = rows;
        rng.shuffle(shuffled.begin(), shuffled.end());
        train_rows.insert(train_rows.end(), shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
        test_rows.insert(test_rows.end(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train), shuffled.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return {ds.subset(train_rows), ds.subset(test_rows)};
}

Dataset stratified_subsample(const Dataset& ds, std::size_t cap, std::uint64_t seed) {
    if (ds.size() <= cap) return ds;
    const auto by_class = rows_by_class(ds);
    const double n = static_cast<double>(ds.size());

    // Largest-remainder apportionment of `cap` over classes.
    std::array<std::size_t, kNumClasses> quota{};
    std::array<double, kNumClasses> remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const double exact = static_cast<double>(cap) * static_cast<double>(by_class[c].size()) / n;
        quota[c] = static_cast<std::size_t>(std::floor(exact));
        remainder[c] = exact - std::floor(exact);
        assigned += quota[c];
    }
    std::array<std::size_t, kNumClasses> order;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < cap; ++k) {
        const auto c = order[k % order.size()];
        if (quota[c] < by_class[c].size()) {
            ++quota[c];
            ++assigned;
        }
    }

    Rng rng(seed);
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto rows = by_class[c];
        rng.shuffle(rows.begin(), rows.end());
        keep.insert(keep.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    }
    std::sort(keep.begin(), keep.end());
    return ds.subset(keep);
}

Scaler fit_scaler(const Dataset& ds) {
    if (ds.empty()) throw EmptyDatasetError("cannot fit a scaler on an empty dataset");
    Scaler s;
    const double n = static_cast<double>(ds.size());
    FeatureVector sum = FeatureVector::Zero();
    for (const auto& r : ds.records()) sum += r.values;
    s.means = sum / n;
    FeatureVector sq = FeatureVector::Zero();
    for (const auto& r : ds.records()) sq += (r.values - s.means).array().square().matrix();
    s.stds = (sq / n).array().sqrt().matrix();
    // Roundoff on constant columns can leave a tiny nonzero spread.
    for (int c = 0; c < kNumFeatures; ++c) {
        if (s.stds[c] <= 1e-12 * std::max(1.0, std::abs(s.means[c]))) s.stds[c] = 0.0;
    }
    s.fitted_on = ds.size();
    return s;
}

FeatureVector Scaler::transform(const FeatureVector& x) const {
    FeatureVector z;
    for (int c = 0; c < kNumFeatures; ++c) z[c] = stds[c] > 0.0 ? (x[c] - means[c]) / stds[c] : 0.0;
    return z;
}

Eigen::MatrixXd Scaler::transform(const Dataset& ds) const {
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(ds.size()), kNumFeatures);
    for (std::size_t i = 0; i < ds.size(); ++i) Z.row(static_cast<Eigen::Index>(i)) = transform(ds[i].values).transpose();
    return Z;
}

}  // namespace jamids

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jamids/dataset.hpp"
#include "jamids/errors.hpp"
#include "jamids/features.hpp"
#include "jamids/hash.hpp"
#include "jamids/metrics.hpp"
#include "jamids/pipeline.hpp"
#include "jamids/random.hpp"
#include "jamids/serialize.hpp"
#include "jamids/simulator.hpp"

namespace fs = std::filesystem;
using namespace jamids;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kTraining = 3, kMismatch = 4, kIo = 5 };

struct Exit : std::runtime_error {
    int code;
    Exit(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

// "<dir>/<stem><suffix>" for an output path.
std::string sibling(const std::string& path, const std::string& suffix) {
    const fs::path p(path);
    return (p.parent_path() / (p.stem().string() + suffix)).string();
}

// One manifest per artifact-producing command, written beside its first output.
class Manifest {
public:
    Manifest(std::string command, const std::vector<std::string>& argv) {
        j_["command"] = std::move(command);
        j_["argv"] = argv;
        j_["version"] = JAMIDS_VERSION;
        j_["inputs"] = Json::array();
        j_["outputs"] = Json::array();
        j_["timings_seconds"] = Json::object();
    }
    void config(Json c) { j_["config"] = std::move(c); }
    void seeds(Json s) { j_["seeds"] = std::move(s); }
    void input(const std::string& path) { j_["inputs"].push_back({{"path", path}, {"sha256", sha256_file(path)}}); }
    void output(const std::string& path) { j_["outputs"].push_back({{"path", path}, {"sha256", sha256_file(path)}}); }
    void timing(const std::string& what, double s) { j_["timings_seconds"][what] = s; }
    void write(const std::string& first_output) const { write_text(sibling(first_output, ".manifest.json"), dump(j_)); }

private:
    Json j_;
};

Json seed_fanout(std::uint64_t seed) {
    Json s{{"seed", seed}};
    for (auto [name, stream] : {std::pair{"split", Stream::Split}, {"mlp_init", Stream::MlpInit},
                                {"mlp_train", Stream::MlpTrain}, {"svm_subsample", Stream::SvmSubsample},
                                {"svm_solver", Stream::SvmSolver}, {"simulation", Stream::Simulation},
                                {"validation", Stream::Validation}})
        s[name] = derive_seed(seed, stream);
    return s;
}

struct DataFlags {
    std::string path;
    std::string label_column;
    std::string label_map;
};

void add_data_flags(CLI::App* cmd, DataFlags& f, bool required = true) {
    auto* opt = cmd->add_option("--data", f.path, "Input CSV");
    if (required) opt->required();
    cmd->add_option("--label-column", f.label_column, "Header name of the label column");
    cmd->add_option("--label-map", f.label_map, "JSON object mapping raw label strings to classes");
}

Dataset load_data(const DataFlags& f, bool require_label, LabelMap& map_storage) {
    CsvOptions opts;
    opts.require_label = require_label;
    if (!f.label_column.empty()) opts.label_aliases = {normalize_token(f.label_column)};
    if (!f.label_map.empty()) {
        map_storage = LabelMap::from_json_file(f.label_map);
        opts.label_map = &map_storage;
    }
    return load_csv(f.path, opts);
}

PipelineModel load_model(const std::string& path) { return pipeline_from_json(load_json(path)); }

// Runs `fn`, turning library errors into the documented exit codes.
int guarded(auto&& fn, int data_code = kMismatch) {
    try {
        fn();
        return kOk;
    } catch (const Exit& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return data_code;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
}

// ---- simulate ----

struct SimulateArgs {
    std::string out, config;
    std::optional<int> nodes, rounds;
    std::optional<std::uint64_t> seed;
    std::optional<double> p;
    bool no_jammers = false;
};

void cmd_simulate(const SimulateArgs& a, const std::vector<std::string>& argv) {
    const auto t0 = Clock::now();
    SimulationConfig sc;
    if (!a.config.empty()) sc = simulation_config_from_json(load_json(a.config));
    if (a.nodes) sc.leach.num_nodes = *a.nodes;
    if (a.rounds) sc.leach.rounds = *a.rounds;
    if (a.seed) sc.leach.seed = *a.seed;
    if (a.p) sc.leach.p = *a.p;
    if (a.no_jammers) sc.jammers.clear();

    SimulationReport report;
    const Dataset ds = generate_dataset(sc.leach, sc.jammers, &report);
    const double sim_s = seconds_since(t0);
    write_csv(ds, a.out);

    Manifest m("simulate", argv);
    m.config(to_json(sc));
    m.seeds({{"seed", sc.leach.seed}});
    if (!a.config.empty()) m.input(a.config);
    m.output(a.out);
    m.timing("simulate", sim_s);
    m.timing("total", seconds_since(t0));
    m.write(a.out);

    std::cout << "records " << ds.size() << " rounds " << report.rounds_played << "\n";
    for (Label l : kAllLabels) std::cout << "  " << to_string(l) << ": " << report.class_counts[index_of(l)] << "\n";
}

// ---- split ----

struct SplitArgs {
    DataFlags data;
    double ratio = 0.7;
    std::uint64_t seed = 7;
    std::string train_out, test_out;
};

void cmd_split(const SplitArgs& a, const std::vector<std::string>& argv) {
    const auto t0 = Clock::now();
    LabelMap lm;
    const Dataset ds = load_data(a.data, true, lm);
    const auto seed = derive_seed(a.seed, Stream::Split);
    auto [train, test] = stratified_split(ds, a.ratio, seed);
    write_csv(train, a.train_out);
    write_csv(test, a.test_out);

    Manifest m("split", argv);
    m.config({{"ratio", a.ratio}});
    m.seeds({{"seed", a.seed}, {"split", seed}});
    m.input(a.data.path);
    m.output(a.train_out);
    m.output(a.test_out);
    m.timing("total", seconds_since(t0));
    m.write(a.train_out);
    std::cout << "train " << train.size() << " test " << test.size() << "\n";
}

// ---- train ----

struct TrainArgs {
    DataFlags data;
    std::string out;
    PipelineConfig cfg;
    std::string activation = "relu";
    std::string kernel = "rbf";
    std::optional<double> gamma;
    double val_ratio = 0.2;
};

Json stage_summary(const std::vector<Label>& truth, const std::vector<Label>& pred) {
    const Rates r = rates(confusion(truth, pred));
    return to_json(r);
}

void cmd_train(TrainArgs a, const std::vector<std::string>& argv) {
    const auto t0 = Clock::now();
    a.cfg.activation = parse_activation(a.activation);
    if (a.kernel == "rbf")
        a.cfg.svm.kernel = KernelKind::Rbf;
    else if (a.kernel == "linear")
        a.cfg.svm.kernel = KernelKind::Linear;
    else
        throw ConfigError("--kernel must be rbf or linear");
    a.cfg.svm.gamma = a.gamma;
    if (!(a.val_ratio >= 0.0 && a.val_ratio < 1.0)) throw ConfigError("--val-ratio must lie in [0, 1)");
    a.cfg.mlp.validate();

    LabelMap lm;
    const Dataset ds = load_data(a.data, true, lm);
    const std::string hash = sha256_file(a.data.path);

    Dataset fit = ds, val;
    if (a.val_ratio > 0.0) std::tie(fit, val) = stratified_split(ds, 1.0 - a.val_ratio, derive_seed(a.cfg.seed, Stream::Validation));

    const auto t1 = Clock::now();
    PipelineModel model;
    try {
        model = train_pipeline(fit, a.cfg, hash);
    } catch (const IoError&) {
        throw;
    } catch (const Error& e) {
        throw Exit(kTraining, std::string("training failed: ") + e.what());
    }
    const double train_s = seconds_since(t1);
    save_json(to_json(model), a.out);

    Json report;
    report["train_rows"] = fit.size();
    report["loss_history"] = model.metadata.mlp_loss_history;
    Json cols = Json::array();
    for (int c : model.selected_columns) cols.push_back(model.column_names[static_cast<std::size_t>(c)]);
    report["selected_columns"] = cols;
    report["svm"] = {{"support_vectors", model.ksvm.num_support_vectors()},
                     {"iterations", model.ksvm.iterations},
                     {"converged", model.ksvm.converged},
                     {"gamma", model.metadata.svm_gamma}};
    report["validation"] = nullptr;
    if (!val.empty()) {
        const auto res = classify_batch(model, val);
        std::vector<Label> s1, fin;
        for (const auto& v : res.verdicts) {
            s1.push_back(v.stage1_label);
            fin.push_back(v.final_label);
        }
        const auto truth = val.labels();
        report["validation"] = {{"rows", val.size()},
                                {"mlp_only", stage_summary(truth, s1)},
                                {"mlp_ksvm", stage_summary(truth, fin)}};
    }
    const std::string report_path = sibling(a.out, ".report.json");
    save_json(report, report_path);

    Manifest m("train", argv);
    m.config([&] {
        const Json mj = to_json(model);
        Json c = mj["config"];
        c["mlp"] = mj["mlp"]["train_config"];
        c["val_ratio"] = a.val_ratio;
        return c;
    }());
    m.seeds(seed_fanout(a.cfg.seed));
    m.input(a.data.path);
    if (!a.data.label_map.empty()) m.input(a.data.label_map);
    m.output(a.out);
    m.output(report_path);
    m.timing("train", train_s);
    m.timing("total", seconds_since(t0));
    m.write(a.out);

    std::cout << "trained on " << fit.size() << " rows, " << model.ksvm.num_support_vectors() << " support vectors\n";
    if (!val.empty()) {
        std::cout << std::fixed << std::setprecision(4)
                  << "validation accuracy: mlp " << report["validation"]["mlp_only"]["accuracy"].get<double>()
                  << "  mlp+ksvm " << report["validation"]["mlp_ksvm"]["accuracy"].get<double>() << "\n";
    }
}

// ---- eval ----

struct EvalArgs {
    std::string model;
    DataFlags data;
    std::string out;
    std::string plot;
};

void print_confusion(std::ostream& os, const std::string& title, const ConfusionMatrix& cm) {
    static const char* abbr[] = {"Normal", "Constant", "Random", "Deceptive", "Reactive"};
    os << title << " (rows: truth, columns: predicted)\n" << std::setw(11) << "";
    for (auto* a : abbr) os << std::setw(11) << a;
    os << "\n";
    for (int r = 0; r < kNumClasses; ++r) {
        os << std::setw(11) << abbr[r];
        for (int c = 0; c < kNumClasses; ++c) os << std::setw(11) << cm.counts(r, c);
        os << "\n";
    }
}

void cmd_eval(const EvalArgs& a, const std::vector<std::string>& argv) {
    const auto t0 = Clock::now();
    const PipelineModel model = load_model(a.model);
    LabelMap lm;
    const Dataset ds = load_data(a.data, true, lm);
    if (ds.empty()) throw Exit(kMismatch, "evaluation data has no records");

    const auto res = classify_batch(model, ds);
    const auto truth = ds.labels();
    std::vector<Label> s1, fin;
    std::vector<double> score1, score2;
    std::vector<int> binary;
    for (std::size_t i = 0; i < res.verdicts.size(); ++i) {
        const auto& v = res.verdicts[i];
        s1.push_back(v.stage1_label);
        fin.push_back(v.final_label);
        score1.push_back(mlp_attack_score(v));
        score2.push_back(pipeline_attack_score(v));
        binary.push_back(is_attack(truth[i]) ? 1 : -1);
    }
    const auto cm1 = confusion(truth, s1), cm2 = confusion(truth, fin);

    std::optional<RocCurve> roc1, roc2;
    try {
        roc1 = roc(score1, binary);
        roc2 = roc(score2, binary);
    } catch (const SingleClassError&) {
    }

    auto block = [](const ConfusionMatrix& cm, const std::optional<RocCurve>& curve) {
        Json b{{"confusion", to_json(cm)}, {"rates", to_json(rates(cm))}};
        b["auc"] = curve ? Json(curve->auc) : Json(nullptr);
        return b;
    };
    Json metrics{{"records", ds.size()}, {"mlp_only", block(cm1, roc1)}, {"mlp_ksvm", block(cm2, roc2)}};
    save_json(metrics, a.out);

    Manifest m("eval", argv);
    m.input(a.model);
    m.input(a.data.path);
    m.output(a.out);
    if (roc1) {
        const auto p1 = sibling(a.out, ".roc_mlp.csv"), p2 = sibling(a.out, ".roc_mlp_ksvm.csv");
        write_text(p1, roc_to_csv(*roc1));
        write_text(p2, roc_to_csv(*roc2));
        m.output(p1);
        m.output(p2);
        if (!a.plot.empty()) {
            write_text(a.plot, roc_to_svg({{"MLP", &*roc1}, {"MLP + KSVM", &*roc2}}));
            m.output(a.plot);
        }
    } else if (!a.plot.empty()) {
        std::cerr << "warning: data holds a single binary class; no ROC curve or plot written\n";
    }
    m.config({{"model_dataset_hash", model.metadata.dataset_hash}});
    m.seeds({{"seed", model.metadata.seed}});
    m.timing("classify", res.seconds);
    m.timing("records_per_second", res.records_per_second);
    m.timing("total", seconds_since(t0));
    m.write(a.out);

    const Rates r1 = rates(cm1), r2 = rates(cm2);
    std::cout << std::fixed << std::setprecision(4);
    std::cout << "accuracy  mlp " << r1.accuracy.value_or(0) << "  mlp+ksvm " << r2.accuracy.value_or(0) << "\n";
    std::cout << "false negatives  mlp " << r1.fn << "  mlp+ksvm " << r2.fn << "\n";
    print_confusion(std::cout, "MLP", cm1);
    print_confusion(std::cout, "MLP + KSVM", cm2);
}

// ---- classify ----

struct ClassifyArgs {
    std::string model;
    DataFlags data;
    std::string record;
    std::string out;
};

FeatureVector parse_record_flag(const std::string& text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            vals.push_back(std::stod(cell, &used));
            if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
        } catch (const std::logic_error&) {
            throw Exit(kUsage, "--record: cannot parse '" + cell + "' as a number");
        }
    }
    if (vals.size() != static_cast<std::size_t>(kNumFeatures))
        throw Exit(kMismatch, "--record has " + std::to_string(vals.size()) + " values, the model expects " +
                                  std::to_string(kNumFeatures));
    FeatureVector x;
    for (int i = 0; i < kNumFeatures; ++i) x[i] = vals[static_cast<std::size_t>(i)];
    return x;
}

void cmd_classify(const ClassifyArgs& a, const std::vector<std::string>& argv) {
    const auto t0 = Clock::now();
    if (a.data.path.empty() == a.record.empty()) throw Exit(kUsage, "give exactly one of --data or --record");
    const PipelineModel model = load_model(a.model);

    std::vector<Verdict> verdicts;
    if (!a.record.empty()) {
        verdicts.push_back(classify(model, parse_record_flag(a.record)));
    } else {
        const std::string text = slurp(a.data.path);
        if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
            LabelMap lm;
            const Dataset ds = load_data(a.data, false, lm);
            verdicts = classify_batch(model, ds).verdicts;
        }
    }
    const std::string csv = verdicts_to_csv(verdicts);
    if (a.out.empty()) {
        std::cout << csv;
        return;
    }
    write_text(a.out, csv);
    Manifest m("classify", argv);
    m.input(a.model);
    if (!a.data.path.empty()) m.input(a.data.path);
    m.output(a.out);
    m.config({{"model_dataset_hash", model.metadata.dataset_hash}});
    m.seeds({{"seed", model.metadata.seed}});
    m.timing("total", seconds_since(t0));
    m.write(a.out);
}

// ---- rank ----

struct RankArgs {
    DataFlags data;
    std::string out;
    double pca_variance = PipelineConfig{}.pca_variance;
};

void cmd_rank(const RankArgs& a, const std::vector<std::string>& argv) {
    const auto t0 = Clock::now();
    if (!(a.pca_variance > 0.0 && a.pca_variance <= 1.0)) throw ConfigError("--pca-variance must lie in (0, 1]");
    LabelMap lm;
    const Dataset ds = load_data(a.data, false, lm);
    const Scaler sc = fit_scaler(ds);
    const Eigen::MatrixXd X = sc.transform(ds);
    const auto full = pca_fit(X, static_cast<int>(X.cols()));
    const int k = components_for_variance(full.explained_variance, a.pca_variance);
    const auto ranking = rank_features(pca_fit(X, k));

    std::ostringstream csv;
    csv << "column_name,score\n";
    for (const auto& f : ranking) {
        char buf[64];
        const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, f.score);
        csv << ds.column_names()[static_cast<std::size_t>(f.column)] << ',' << std::string(buf, end) << '\n';
    }
    write_text(a.out, csv.str());

    Manifest m("rank", argv);
    m.config({{"pca_variance", a.pca_variance}, {"pca_components", k}});
    m.seeds(Json::object());
    m.input(a.data.path);
    m.output(a.out);
    m.timing("total", seconds_since(t0));
    m.write(a.out);
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App app{"Two-stage jamming-attack IDS and LEACH WSN simulator"};
    app.set_version_flag("--version", std::string(JAMIDS_VERSION));
    app.require_subcommand(1);

    auto in_unit_open = [](double lo_open) {
        return CLI::Validator(
            [lo_open](std::string& s) -> std::string {
                const double v = std::stod(s);
                return v > lo_open && v < 1.0 ? "" : "must lie in (0, 1)";
            },
            "(0, 1)");
    };
    const CLI::Validator positive_int = CLI::PositiveNumber;

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Run the LEACH simulator and write a labeled CSV");
    c_sim->add_option("--out", sim.out, "Output CSV")->required();
    c_sim->add_option("--config", sim.config, "JSON simulation config (flags override it)");
    c_sim->add_option("--nodes", sim.nodes, "Number of sensor nodes")->check(positive_int);
    c_sim->add_option("--rounds", sim.rounds, "Rounds to simulate")->check(positive_int);
    c_sim->add_option("--seed", sim.seed, "Simulation seed");
    c_sim->add_option("--p", sim.p, "Desired cluster-head fraction")->check(in_unit_open(0.0));
    c_sim->add_flag("--no-jammers", sim.no_jammers, "Simulate without adversaries");

    SplitArgs split;
    auto* c_split = app.add_subcommand("split", "Stratified train/test split of a labeled CSV");
    add_data_flags(c_split, split.data);
    c_split->add_option("--ratio", split.ratio, "Training share")->check(in_unit_open(0.0));
    c_split->add_option("--seed", split.seed, "Seed");
    c_split->add_option("--train", split.train_out, "Training CSV output")->required();
    c_split->add_option("--test", split.test_out, "Test CSV output")->required();

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Train the two-stage pipeline");
    add_data_flags(c_train, train.data);
    c_train->add_option("--out", train.out, "Model JSON output")->required();
    c_train->add_option("--fs-k", train.cfg.fs_k, "Number of selected features")->check(positive_int);
    c_train->add_option("--pca-variance", train.cfg.pca_variance, "Variance share of components used for ranking");
    c_train->add_option("--hidden", train.cfg.hidden_layers, "Hidden layer widths")->delimiter(',')->check(positive_int);
    c_train->add_option("--activation", train.activation, "Hidden activation: relu or tanh");
    c_train->add_option("--epochs", train.cfg.mlp.epochs, "MLP epochs");
    c_train->add_option("--lr", train.cfg.mlp.learning_rate, "MLP learning rate");
    c_train->add_option("--batch-size", train.cfg.mlp.batch_size, "MLP mini-batch size");
    c_train->add_option("--l2", train.cfg.mlp.l2, "MLP weight penalty");
    c_train->add_option("--C", train.cfg.svm.C, "SVM box constraint");
    c_train->add_option("--kernel", train.kernel, "SVM kernel: rbf or linear");
    c_train->add_option("--gamma", train.gamma, "RBF gamma (default 1/(k * feature variance))");
    c_train->add_option("--tol", train.cfg.svm.tol, "SMO KKT tolerance");
    c_train->add_option("--max-passes", train.cfg.svm.max_passes, "SMO iteration budget in passes over the data");
    c_train->add_option("--svm-cap", train.cfg.svm.subsample_cap, "Stratified row cap for SVM training");
    c_train->add_option("--seed", train.cfg.seed, "Master seed");
    c_train->add_option("--val-ratio", train.val_ratio, "Share held out for the validation report");

    EvalArgs ev;
    auto* c_eval = app.add_subcommand("eval", "Evaluate a model on labeled data");
    c_eval->add_option("--model", ev.model, "Model JSON")->required();
    add_data_flags(c_eval, ev.data);
    c_eval->add_option("--out", ev.out, "Metrics JSON output")->required();
    c_eval->add_option("--plot", ev.plot, "ROC plot SVG output");

    ClassifyArgs cl;
    auto* c_cls = app.add_subcommand("classify", "Classify records from a CSV or a single --record");
    c_cls->add_option("--model", cl.model, "Model JSON")->required();
    add_data_flags(c_cls, cl.data, false);
    c_cls->add_option("--record", cl.record, "23 comma-separated feature values");
    c_cls->add_option("--out", cl.out, "Verdict CSV output (stdout if omitted)");

    RankArgs rk;
    auto* c_rank = app.add_subcommand("rank", "Rank features by PCA importance");
    add_data_flags(c_rank, rk.data);
    c_rank->add_option("--out", rk.out, "Ranking CSV output")->required();
    c_rank->add_option("--pca-variance", rk.pca_variance, "Variance share of components used for ranking");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (c_sim->parsed()) return guarded([&] { cmd_simulate(sim, args); }, kUsage);
    if (c_split->parsed()) return guarded([&] { cmd_split(split, args); });
    if (c_train->parsed()) return guarded([&] { cmd_train(train, args); });
    if (c_eval->parsed()) return guarded([&] { cmd_eval(ev, args); });
    if (c_cls->parsed()) return guarded([&] { cmd_classify(cl, args); });
    if (c_rank->parsed()) return guarded([&] { cmd_rank(rk, args); });
    return kUsage;
}

#include "jamids/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "jamids/errors.hpp"

namespace jamids {

namespace {

template <typename Derived>
Json flat(const Eigen::DenseBase<Derived>& m) {
    // Row-major flattening.
    Json arr = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
    return arr;
}

Eigen::MatrixXd matrix_from(const Json& arr, Eigen::Index rows, Eigen::Index cols) {
    if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols)
        throw SchemaError("matrix payload has the wrong length");
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = arr[k++].get<double>();
    return m;
}

Eigen::VectorXd vector_from(const Json& arr) {
    if (!arr.is_array()) throw SchemaError("expected an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    return v;
}

void check_format(const Json& j, const char* format) {
    if (!j.is_object() || j.value("format", "") != format)
        throw SchemaError(std::string("not a ") + format + " document");
    if (j.value("version", 0) != kFormatVersion)
        throw SchemaError(std::string(format) + " version " + std::to_string(j.value("version", 0)) + " unsupported");
}

Json rate(const Rate& r) { return r ? Json(*r) : Json(nullptr); }

void append_double(std::string& out, double v) {
    if (std::isinf(v)) {
        out += v > 0 ? "inf" : "-inf";
        return;
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

template <typename T>
T wrap(const char* what, auto&& fn) {
    try {
        return fn();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string(what) + ": " + e.what());
    }
}

}  // namespace

Json to_json(const Scaler& s) {
    return {{"means", flat(s.means.transpose())}, {"stds", flat(s.stds.transpose())}, {"fitted_on", s.fitted_on}};
}

Scaler scaler_from_json(const Json& j) {
    return wrap<Scaler>("scaler", [&] {
        Scaler s;
        const auto means = vector_from(j.at("means"));
        const auto stds = vector_from(j.at("stds"));
        if (means.size() != kNumFeatures || stds.size() != kNumFeatures) throw SchemaError("scaler must have 23 entries");
        s.means = means;
        s.stds = stds;
        s.fitted_on = j.at("fitted_on").get<std::size_t>();
        return s;
    });
}

Json to_json(const MlpModel& m, const TrainConfig* cfg) {
    Json j = {{"format", "jamids.mlp"},
              {"version", kFormatVersion},
              {"layer_sizes", m.layer_sizes},
              {"activation", std::string(to_string(m.hidden_activation))},
              {"rng_seed", m.rng_seed}};
    Json weights = Json::array(), biases = Json::array();
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        weights.push_back(flat(m.weights[l]));
        biases.push_back(flat(m.biases[l].transpose()));
    }
    j["weights"] = std::move(weights);
    j["biases"] = std::move(biases);
    if (cfg) {
        j["train_config"] = {{"learning_rate", cfg->learning_rate},
                             {"batch_size", cfg->batch_size},
                             {"epochs", cfg->epochs},
                             {"seed", cfg->seed},
                             {"l2", cfg->l2}};
    }
    return j;
}

MlpModel mlp_from_json(const Json& j) {
    check_format(j, "jamids.mlp");
    return wrap<MlpModel>("mlp", [&] {
        MlpModel m;
        m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
        m.hidden_activation = parse_activation(j.at("activation").get<std::string>());
        m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        if (m.layer_sizes.size() < 3 || m.layer_sizes.back() != kNumClasses) throw SchemaError("bad MLP layer sizes");
        const auto& W = j.at("weights");
        const auto& B = j.at("biases");
        if (W.size() + 1 != m.layer_sizes.size() || B.size() != W.size()) throw SchemaError("MLP layer count mismatch");
        for (std::size_t l = 0; l < W.size(); ++l) {
            m.weights.push_back(matrix_from(W[l], m.layer_sizes[l + 1], m.layer_sizes[l]));
            m.biases.push_back(matrix_from(B[l], m.layer_sizes[l + 1], 1));
        }
        return m;
    });
}

Json to_json(const KsvmModel& m) {
    return {{"format", "jamids.ksvm"},
            {"version", kFormatVersion},
            {"kernel", {{"kind", std::string(to_string(m.kernel.kind))}, {"gamma", m.kernel.gamma}}},
            {"C", m.C},
            {"tol", m.tol},
            {"bias", m.bias},
            {"num_features", m.feature_count()},
            {"support_vectors", flat(m.support_vectors)},
            {"sv_labels", flat(m.sv_labels.transpose())},
            {"alphas", flat(m.alphas.transpose())},
            {"converged", m.converged},
            {"iterations", m.iterations},
            {"training_rows", m.training_rows},
            {"subsample_cap", m.subsample_cap},
            {"subsample_seed", m.subsample_seed}};
}

KsvmModel ksvm_from_json(const Json& j) {
    check_format(j, "jamids.ksvm");
    return wrap<KsvmModel>("ksvm", [&] {
        KsvmModel m;
        m.kernel.kind = parse_kernel_kind(j.at("kernel").at("kind").get<std::string>());
        m.kernel.gamma = j.at("kernel").at("gamma").get<double>();
        m.C = j.at("C").get<double>();
        m.tol = j.at("tol").get<double>();
        m.bias = j.at("bias").get<double>();
        const auto k = j.at("num_features").get<Eigen::Index>();
        m.alphas = vector_from(j.at("alphas"));
        m.sv_labels = vector_from(j.at("sv_labels"));
        m.support_vectors = matrix_from(j.at("support_vectors"), m.alphas.size(), k);
        if (m.sv_labels.size() != m.alphas.size()) throw SchemaError("SVM label/alpha count mismatch");
        m.converged = j.at("converged").get<bool>();
        m.iterations = j.at("iterations").get<long>();
        m.training_rows = j.at("training_rows").get<std::size_t>();
        m.subsample_cap = j.at("subsample_cap").get<std::size_t>();
        m.subsample_seed = j.at("subsample_seed").get<std::uint64_t>();
        return m;
    });
}

Json to_json(const PipelineModel& p) {
    const auto& c = p.config;
    const auto& md = p.metadata;
    Json ranking = Json::array();
    for (const auto& fs : md.ranking) ranking.push_back({{"column", fs.column}, {"score", fs.score}});
    Json counts = Json::object();
    for (Label l : kAllLabels) counts[std::string(to_string(l))] = md.train_class_counts[static_cast<std::size_t>(index_of(l))];

    return {{"format", "jamids.pipeline"},
            {"version", kFormatVersion},
            {"column_names", p.column_names},
            {"scaler", to_json(p.scaler)},
            {"selected_columns", p.selected_columns},
            {"mlp", to_json(p.mlp, &c.mlp)},
            {"ksvm", to_json(p.ksvm)},
            {"config",
             {{"hidden_layers", c.hidden_layers},
              {"activation", std::string(to_string(c.activation))},
              {"fs_k", c.fs_k},
              {"pca_variance", c.pca_variance},
              {"seed", c.seed},
              {"svm",
               {{"C", c.svm.C},
                {"kernel", std::string(to_string(c.svm.kernel))},
                {"gamma", c.svm.gamma ? Json(*c.svm.gamma) : Json(nullptr)},
                {"tol", c.svm.tol},
                {"max_passes", c.svm.max_passes},
                {"subsample_cap", c.svm.subsample_cap},
                {"cache_mb", c.svm.cache_mb}}}}},
            {"metadata",
             {{"seed", md.seed},
              {"seeds",
               {{"mlp_init", md.mlp_init_seed},
                {"mlp_train", md.mlp_train_seed},
                {"svm_subsample", md.svm_subsample_seed},
                {"svm_solver", md.svm_solver_seed}}},
              {"dataset_hash", md.dataset_hash},
              {"train_rows", md.train_rows},
              {"train_class_counts", counts},
              {"pca_components", md.pca_components},
              {"ranking", ranking},
              {"mlp_loss_history", md.mlp_loss_history},
              {"svm_gamma", md.svm_gamma}}}};
}

PipelineModel pipeline_from_json(const Json& j) {
    check_format(j, "jamids.pipeline");
    auto p = wrap<PipelineModel>("pipeline", [&] {
        PipelineModel p;
        p.column_names = j.at("column_names").get<std::vector<std::string>>();
        p.scaler = scaler_from_json(j.at("scaler"));
        p.selected_columns = j.at("selected_columns").get<std::vector<int>>();
        p.mlp = mlp_from_json(j.at("mlp"));
        p.ksvm = ksvm_from_json(j.at("ksvm"));

        const auto& c = j.at("config");
        auto& cfg = p.config;
        cfg.hidden_layers = c.at("hidden_layers").get<std::vector<int>>();
        cfg.activation = parse_activation(c.at("activation").get<std::string>());
        cfg.fs_k = c.at("fs_k").get<int>();
        cfg.pca_variance = c.at("pca_variance").get<double>();
        cfg.seed = c.at("seed").get<std::uint64_t>();
        const auto& s = c.at("svm");
        cfg.svm.C = s.at("C").get<double>();
        cfg.svm.kernel = parse_kernel_kind(s.at("kernel").get<std::string>());
        if (!s.at("gamma").is_null()) cfg.svm.gamma = s.at("gamma").get<double>();
        cfg.svm.tol = s.at("tol").get<double>();
        cfg.svm.max_passes = s.at("max_passes").get<int>();
        cfg.svm.subsample_cap = s.at("subsample_cap").get<std::size_t>();
        cfg.svm.cache_mb = s.at("cache_mb").get<double>();
        if (const auto& tc = j.at("mlp"); tc.contains("train_config")) {
            const auto& t = tc.at("train_config");
            cfg.mlp.learning_rate = t.at("learning_rate").get<double>();
            cfg.mlp.batch_size = t.at("batch_size").get<int>();
            cfg.mlp.epochs = t.at("epochs").get<int>();
            cfg.mlp.seed = t.at("seed").get<std::uint64_t>();
            cfg.mlp.l2 = t.at("l2").get<double>();
        }

        const auto& m = j.at("metadata");
        auto& md = p.metadata;
        md.seed = m.at("seed").get<std::uint64_t>();
        md.mlp_init_seed = m.at("seeds").at("mlp_init").get<std::uint64_t>();
        md.mlp_train_seed = m.at("seeds").at("mlp_train").get<std::uint64_t>();
        md.svm_subsample_seed = m.at("seeds").at("svm_subsample").get<std::uint64_t>();
        md.svm_solver_seed = m.at("seeds").at("svm_solver").get<std::uint64_t>();
        md.dataset_hash = m.at("dataset_hash").get<std::string>();
        md.train_rows = m.at("train_rows").get<std::size_t>();
        for (Label l : kAllLabels)
            md.train_class_counts[static_cast<std::size_t>(index_of(l))] =
                m.at("train_class_counts").at(std::string(to_string(l))).get<std::size_t>();
        md.pca_components = m.at("pca_components").get<int>();
        for (const auto& fs : m.at("ranking")) md.ranking.push_back({fs.at("column").get<int>(), fs.at("score").get<double>()});
        md.mlp_loss_history = m.at("mlp_loss_history").get<std::vector<double>>();
        md.svm_gamma = m.at("svm_gamma").get<double>();
        return p;
    });
    if (p.column_names.size() != static_cast<std::size_t>(kNumFeatures)) throw SchemaError("pipeline must list 23 columns");
    p.check_consistency();
    return p;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void save_json(const Json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << dump(j);
    if (!out) throw IoError("write failed: " + path);
}

Json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

Json to_json(const ConfusionMatrix& cm) {
    Json rows = Json::array();
    for (int r = 0; r < kNumClasses; ++r) {
        Json row = Json::array();
        for (int c = 0; c < kNumClasses; ++c) row.push_back(cm.counts(r, c));
        rows.push_back(std::move(row));
    }
    Json labels = Json::array();
    for (Label l : kAllLabels) labels.push_back(std::string(to_string(l)));
    return {{"labels", labels}, {"counts", rows}, {"total", cm.total()}};
}

Json to_json(const Rates& r) {
    Json recalls = Json::object();
    for (Label l : kAllLabels) recalls[std::string(to_string(l))] = rate(r.per_class_recall[static_cast<std::size_t>(index_of(l))]);
    return {{"accuracy", rate(r.accuracy)},
            {"per_class_recall", recalls},
            {"tp", r.tp},
            {"fn", r.fn},
            {"fp", r.fp},
            {"tn", r.tn},
            {"tpr", rate(r.tpr)},
            {"fpr", rate(r.fpr)},
            {"fnr", rate(r.fnr)}};
}

std::string roc_to_csv(const RocCurve& curve) {
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& pt : curve.points) {
        append_double(out, pt.threshold);
        out.push_back(',');
        append_double(out, pt.fpr);
        out.push_back(',');
        append_double(out, pt.tpr);
        out.push_back('\n');
    }
    return out;
}

std::string roc_to_svg(const std::vector<NamedCurve>& curves) {
    constexpr double size = 400.0, margin = 40.0;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * margin << "\" height=\""
        << size + 2 * margin << "\">\n";
    svg << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size << "\" height=\"" << size
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << margin + size << "\" x2=\"" << margin + size << "\" y2=\""
        << margin << "\" stroke=\"#999\" stroke-dasharray=\"4\"/>\n";
    for (std::size_t k = 0; k < curves.size(); ++k) {
        const char* color = colors[k % 4];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const auto& pt : curves[k].curve->points)
            svg << margin + pt.fpr * size << ',' << margin + (1.0 - pt.tpr) * size << ' ';
        svg << "\"/>\n";
        svg << "<text x=\"" << margin + size * 0.45 << "\" y=\"" << margin + size - 20.0 * (curves.size() - k)
            << "\" fill=\"" << color << "\" font-size=\"12\">" << curves[k].name << " (AUC "
            << curves[k].curve->auc << ")</text>\n";
    }
    svg << "<text x=\"" << margin + size / 2 - 50 << "\" y=\"" << size + 2 * margin - 10
        << "\" font-size=\"12\">False positive rate</text>\n";
    svg << "<text x=\"12\" y=\"" << margin + size / 2 + 50 << "\" font-size=\"12\" transform=\"rotate(-90 12 "
        << margin + size / 2 + 50 << ")\">True positive rate</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string verdicts_to_csv(const std::vector<Verdict>& verdicts) {
    std::string out = "index,stage1,stage2_invoked,decision,final\n";
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const auto& v = verdicts[i];
        out += std::to_string(i);
        out.push_back(',');
        out += to_string(v.stage1_label);
        out += v.stage2_invoked ? ",1," : ",0,";
        if (v.stage2_decision) append_double(out, *v.stage2_decision);
        out.push_back(',');
        out += to_string(v.final_label);
        out.push_back('\n');
    }
    return out;
}

Json to_json(const LeachConfig& c) {
    return {{"p", c.p},
            {"num_nodes", c.num_nodes},
            {"rounds", c.rounds},
            {"field_size", c.field_size},
            {"bs_position", {c.bs_position.x, c.bs_position.y}},
            {"initial_energy", c.initial_energy},
            {"frames_per_round", c.frames_per_round},
            {"round_duration", c.round_duration},
            {"seed", c.seed},
            {"radio",
             {{"e_elec", c.radio.e_elec},
              {"eps_fs", c.radio.eps_fs},
              {"e_da", c.radio.e_da},
              {"data_bits", c.radio.data_bits},
              {"ctrl_bits", c.radio.ctrl_bits},
              {"idle_cost", c.radio.idle_cost},
              {"base_loss", c.radio.base_loss},
              {"max_retries", c.radio.max_retries}}}};
}

Json to_json(const JammerConfig& j) {
    Json rounds = Json::array();
    for (auto [a, b] : j.active_rounds) rounds.push_back({a, b});
    return {{"kind", std::string(to_string(j.kind))},
            {"position", {j.position.x, j.position.y}},
            {"radius", j.radius},
            {"power", j.power},
            {"sleep_mean", j.sleep_mean},
            {"jam_mean", j.jam_mean},
            {"sensing_threshold", j.sensing_threshold},
            {"active_rounds", rounds}};
}

LeachConfig leach_config_from_json(const Json& j, LeachConfig c) {
    return wrap<LeachConfig>("leach config", [&] {
        c.p = j.value("p", c.p);
        c.num_nodes = j.value("num_nodes", c.num_nodes);
        c.rounds = j.value("rounds", c.rounds);
        c.field_size = j.value("field_size", c.field_size);
        if (j.contains("bs_position")) c.bs_position = {j["bs_position"].at(0).get<double>(), j["bs_position"].at(1).get<double>()};
        c.initial_energy = j.value("initial_energy", c.initial_energy);
        c.frames_per_round = j.value("frames_per_round", c.frames_per_round);
        c.round_duration = j.value("round_duration", c.round_duration);
        c.seed = j.value("seed", c.seed);
        if (j.contains("radio")) {
            const auto& r = j["radio"];
            c.radio.e_elec = r.value("e_elec", c.radio.e_elec);
            c.radio.eps_fs = r.value("eps_fs", c.radio.eps_fs);
            c.radio.e_da = r.value("e_da", c.radio.e_da);
            c.radio.data_bits = r.value("data_bits", c.radio.data_bits);
            c.radio.ctrl_bits = r.value("ctrl_bits", c.radio.ctrl_bits);
            c.radio.idle_cost = r.value("idle_cost", c.radio.idle_cost);
            c.radio.base_loss = r.value("base_loss", c.radio.base_loss);
            c.radio.max_retries = r.value("max_retries", c.radio.max_retries);
        }
        return c;
    });
}

JammerConfig jammer_from_json(const Json& j) {
    return wrap<JammerConfig>("jammer config", [&] {
        JammerConfig c;
        c.kind = parse_jammer_kind(j.at("kind").get<std::string>());
        if (j.contains("position")) c.position = {j["position"].at(0).get<double>(), j["position"].at(1).get<double>()};
        c.radius = j.value("radius", c.radius);
        c.power = j.value("power", c.power);
        c.sleep_mean = j.value("sleep_mean", c.sleep_mean);
        c.jam_mean = j.value("jam_mean", c.jam_mean);
        c.sensing_threshold = j.value("sensing_threshold", c.sensing_threshold);
        if (j.contains("active_rounds"))
            for (const auto& iv : j["active_rounds"]) c.active_rounds.emplace_back(iv.at(0).get<int>(), iv.at(1).get<int>());
        return c;
    });
}

SimulationConfig simulation_config_from_json(const Json& j) {
    SimulationConfig c;
    if (j.contains("leach")) c.leach = leach_config_from_json(j["leach"]);
    if (j.contains("jammers")) {
        c.jammers.clear();
        for (const auto& jm : j["jammers"]) c.jammers.push_back(jammer_from_json(jm));
    }
    return c;
}

Json to_json(const SimulationConfig& c) {
    Json jammers = Json::array();
    for (const auto& jm : c.jammers) jammers.push_back(to_json(jm));
    return {{"leach", to_json(c.leach)}, {"jammers", jammers}};
}

}  // namespace jamids

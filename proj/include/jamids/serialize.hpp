#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "jamids/ksvm.hpp"
#include "jamids/metrics.hpp"
#include "jamids/mlp.hpp"
#include "jamids/pipeline.hpp"
#include "jamids/simulator.hpp"

namespace jamids {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

Json to_json(const Scaler& s);
Scaler scaler_from_json(const Json& j);

Json to_json(const MlpModel& m, const TrainConfig* cfg = nullptr);
MlpModel mlp_from_json(const Json& j);

Json to_json(const KsvmModel& m);
KsvmModel ksvm_from_json(const Json& j);

Json to_json(const PipelineModel& p);
PipelineModel pipeline_from_json(const Json& j);

// Pretty-printed with a trailing newline; identical models give identical bytes.
std::string dump(const Json& j);
void save_json(const Json& j, const std::string& path);
Json load_json(const std::string& path);

Json to_json(const ConfusionMatrix& cm);
Json to_json(const Rates& r);

// header "threshold,fpr,tpr"; thresholds +-inf written as "inf" / "-inf".
std::string roc_to_csv(const RocCurve& curve);

struct NamedCurve {
    std::string name;
    const RocCurve* curve;
};
std::string roc_to_svg(const std::vector<NamedCurve>& curves);

// header "index,stage1,stage2_invoked,decision,final"; decision empty when stage 2 was skipped.
std::string verdicts_to_csv(const std::vector<Verdict>& verdicts);

Json to_json(const LeachConfig& cfg);
Json to_json(const JammerConfig& j);
LeachConfig leach_config_from_json(const Json& j, LeachConfig base = {});
JammerConfig jammer_from_json(const Json& j);

// {"leach": {...}, "jammers": [...]}; missing keys keep the defaults.
struct SimulationConfig {
    LeachConfig leach;
    std::vector<JammerConfig> jammers = default_jammers();
};
SimulationConfig simulation_config_from_json(const Json& j);
Json to_json(const SimulationConfig& c);

}  // namespace jamids

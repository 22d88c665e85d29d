#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "jamids/dataset.hpp"

namespace jamids {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Vec2&) const = default;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// First-order radio: E_tx = bits * (e_elec + eps_fs * d^2), E_rx = bits * e_elec.
struct RadioModel {
    double e_elec = 50e-9;   // J/bit
    double eps_fs = 10e-12;  // J/bit/m^2
    double e_da = 5e-9;      // J/bit aggregation
    int data_bits = 4000;
    int ctrl_bits = 200;
    double idle_cost = 1e-5;  // J per round
    double base_loss = 0.005; // natural per-attempt loss
    int max_retries = 3;
    bool operator==(const RadioModel&) const = default;
};

struct LeachConfig {
    double p = 0.1;
    int num_nodes = 100;
    int rounds = 400;
    double field_size = 100.0;
    Vec2 bs_position{50.0, 175.0};
    double initial_energy = 2.0;  // J
    int frames_per_round = 5;
    double round_duration = 20.0;  // s
    RadioModel radio;
    std::uint64_t seed = 7;

    // Throws ConfigError naming the offending field.
    void validate() const;
    int epoch_length() const;  // floor(1/p)
};

enum class JammerKind { Constant, Random, Deceptive, Reactive };

std::string_view to_string(JammerKind k) noexcept;
JammerKind parse_jammer_kind(std::string_view s);
Label label_for(JammerKind k) noexcept;

// Half-open round interval [first, last).
using RoundInterval = std::pair<int, int>;

struct JammerConfig {
    JammerKind kind = JammerKind::Constant;
    Vec2 position;
    double radius = 30.0;  // nodes inside are affected while the jammer is active
    double power = 1.0;    // effect strength at the jammer, half of it at the radius
    // Random: mean sleep / jam durations in rounds (exponential on-off process).
    double sleep_mean = 0.1;
    double jam_mean = 0.2;
    // Reactive: senses a node transmitting at distance d iff 1 / (1 + (d/10)^2) >= threshold.
    double sensing_threshold = 0.05;
    std::vector<RoundInterval> active_rounds;

    void validate() const;
    bool scheduled(int round) const;
    double sensing_range() const;
};

// One jammer of each kind on disjoint round intervals over a 400-round run.
std::vector<JammerConfig> default_jammers();

struct NodeState {
    int id = 0;
    Vec2 position;
    double energy = 0.0;
    bool is_ch = false;
    int last_ch_round = -1;  // -1: never served
    int cluster_id = -1;     // id of the node's CH this round, -1 if none

    bool alive() const { return energy > 0.0; }
};

// LEACH threshold with E = floor(1/p): 0 when the node already served as CH in the
// current epoch [r - r mod E, r], else p / (1 - p * (r mod E)). T reaches 1 in the
// last round of an epoch, so every live node serves exactly once per epoch.
double ch_threshold(const NodeState& node, const LeachConfig& cfg, int round);
bool ch_election(const NodeState& node, const LeachConfig& cfg, int round, double draw);

struct RoundTrace {
    int round = 0;
    std::vector<int> cluster_heads;
    std::vector<bool> jammer_active;          // per jammer
    std::vector<std::vector<int>> affected;   // node ids per jammer
    double total_energy_before = 0.0;
    double total_energy_after = 0.0;
};

class Simulator {
public:
    Simulator(LeachConfig cfg, std::vector<JammerConfig> jammers);

    // Plays the next round and returns one record per node alive at its start.
    // Throws DeadNetworkError once every node is depleted.
    std::vector<FeatureRecord> run_round();

    int round() const noexcept { return round_; }
    const std::vector<NodeState>& nodes() const noexcept { return nodes_; }
    const RoundTrace& last_trace() const noexcept { return trace_; }
    double total_energy() const;
    const LeachConfig& config() const noexcept { return cfg_; }

private:
    struct JamTimeline {
        // Sorted toggle times (in rounds) of the random jammer's on/off process; starts asleep.
        std::vector<double> toggles;
        bool on_at(double t) const;
        bool any_on(double from, double to) const;
    };

    LeachConfig cfg_;
    std::vector<JammerConfig> jammers_;
    std::vector<JamTimeline> timelines_;
    std::vector<NodeState> nodes_;
    std::uint64_t draw_seed_;
    int round_ = 0;
    RoundTrace trace_;
};

// Header used for simulator output: the 10 named features, then 13 auxiliary columns.
std::vector<std::string> simulator_column_names();

struct SimulationReport {
    ClassCounts class_counts{};
    int rounds_played = 0;
    double final_energy = 0.0;
};

// Runs cfg.rounds rounds (stopping early if the network dies) and concatenates the records.
Dataset generate_dataset(const LeachConfig& cfg, const std::vector<JammerConfig>& jammers,
                         SimulationReport* report = nullptr);

}  // namespace jamids

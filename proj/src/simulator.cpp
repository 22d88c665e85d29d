#include "jamids/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "jamids/errors.hpp"
#include "jamids/random.hpp"

namespace jamids {

std::string_view to_string(JammerKind k) noexcept {
    switch (k) {
        case JammerKind::Constant: return "constant";
        case JammerKind::Random: return "random";
        case JammerKind::Deceptive: return "deceptive";
        case JammerKind::Reactive: return "reactive";
    }
    return "?";
}

JammerKind parse_jammer_kind(std::string_view s) {
    if (s == "constant") return JammerKind::Constant;
    if (s == "random") return JammerKind::Random;
    if (s == "deceptive") return JammerKind::Deceptive;
    if (s == "reactive") return JammerKind::Reactive;
    throw ConfigError("unknown jammer kind '" + std::string(s) + "'");
}

Label label_for(JammerKind k) noexcept {
    switch (k) {
        case JammerKind::Constant: return Label::ConstantJamming;
        case JammerKind::Random: return Label::RandomJamming;
        case JammerKind::Deceptive: return Label::DeceptiveJamming;
        case JammerKind::Reactive: return Label::ReactiveJamming;
    }
    return Label::Normal;
}

void LeachConfig::validate() const {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("p must lie in (0, 1)");
    if (num_nodes < 1) throw ConfigError("num_nodes must be >= 1");
    if (rounds < 1) throw ConfigError("rounds must be >= 1");
    if (!(field_size > 0.0)) throw ConfigError("field_size must be > 0");
    if (!(initial_energy > 0.0)) throw ConfigError("initial_energy must be > 0");
    if (frames_per_round < 1) throw ConfigError("frames_per_round must be >= 1");
    if (!(round_duration > 0.0)) throw ConfigError("round_duration must be > 0");
    if (!(radio.idle_cost > 0.0)) throw ConfigError("radio.idle_cost must be > 0");
    if (!(radio.base_loss >= 0.0 && radio.base_loss < 1.0)) throw ConfigError("radio.base_loss must lie in [0, 1)");
    if (radio.max_retries < 0) throw ConfigError("radio.max_retries must be >= 0");
}

int LeachConfig::epoch_length() const { return std::max(1, static_cast<int>(std::floor(1.0 / p))); }

void JammerConfig::validate() const {
    if (!(power > 0.0)) throw ConfigError("jammer power must be > 0");
    if (!(radius > 0.0)) throw ConfigError("jammer radius must be > 0");
    if (kind == JammerKind::Random && !(sleep_mean > 0.0 && jam_mean > 0.0))
        throw ConfigError("random jammer duty parameters must be > 0");
    if (kind == JammerKind::Reactive && !(sensing_threshold > 0.0 && sensing_threshold <= 1.0))
        throw ConfigError("reactive sensing_threshold must lie in (0, 1]");
    for (auto [a, b] : active_rounds)
        if (a < 0 || b < a) throw ConfigError("jammer active_rounds intervals must satisfy 0 <= first <= last");
}

bool JammerConfig::scheduled(int round) const {
    return std::any_of(active_rounds.begin(), active_rounds.end(),
                       [round](RoundInterval iv) { return round >= iv.first && round < iv.second; });
}

double JammerConfig::sensing_range() const { return 10.0 * std::sqrt(1.0 / sensing_threshold - 1.0); }

std::vector<JammerConfig> default_jammers() {
    JammerConfig constant;
    constant.kind = JammerKind::Constant;
    constant.position = {25.0, 25.0};
    constant.radius = 40.0;
    constant.power = 1.5;
    constant.active_rounds = {{20, 140}};

    JammerConfig random = constant;
    random.kind = JammerKind::Random;
    random.position = {75.0, 25.0};
    random.power = 3.0;
    random.active_rounds = {{150, 220}};

    JammerConfig deceptive;
    deceptive.kind = JammerKind::Deceptive;
    deceptive.position = {25.0, 75.0};
    deceptive.radius = 30.0;
    deceptive.power = 1.0;
    deceptive.active_rounds = {{240, 300}};

    JammerConfig reactive;
    reactive.kind = JammerKind::Reactive;
    reactive.position = {75.0, 75.0};
    reactive.radius = 25.0;
    reactive.power = 1.5;
    reactive.active_rounds = {{310, 370}};

    return {constant, random, deceptive, reactive};
}

double ch_threshold(const NodeState& node, const LeachConfig& cfg, int round) {
    const int epoch = cfg.epoch_length();
    const int epoch_start = round - round % epoch;
    if (node.last_ch_round >= epoch_start) return 0.0;
    return cfg.p / (1.0 - cfg.p * static_cast<double>(round % epoch));
}

bool ch_election(const NodeState& node, const LeachConfig& cfg, int round, double draw) {
    return draw < ch_threshold(node, cfg, round);
}

bool Simulator::JamTimeline::on_at(double t) const {
    // Number of toggles at or before t decides the phase; even -> asleep.
    const auto k = std::upper_bound(toggles.begin(), toggles.end(), t) - toggles.begin();
    return (k % 2) == 1;
}

bool Simulator::JamTimeline::any_on(double from, double to) const {
    if (on_at(from)) return true;
    const auto it = std::upper_bound(toggles.begin(), toggles.end(), from);
    return it != toggles.end() && *it < to;
}

namespace {

// Event tags for the counter-based draws; each (round, node, tag, k) is an independent uniform.
enum Tag : std::uint64_t {
    kElect = 1,
    kAdvRx,
    kJoinTx,
    kSchRx,
    kDataTx,
    kBsTx,
    kBogusAdv,
    kBogusJoin,
    kTime,
    kNoise,
    kAttemptTime,
    kDefer,
};

constexpr int kExtraDistToCh = 0;
constexpr int kExtraJoinSent = 1;
constexpr int kExtraDataSent = 2;
constexpr int kExtraRetries = 3;
constexpr int kExtraRank = 4;
constexpr int kExtraSchReceived = 5;
constexpr int kExtraResidual = 6;
constexpr int kExtraDropped = 7;
constexpr int kExtraClusterSize = 8;
constexpr int kExtraNoise0 = 9;

// Deceptive jammer: mean bogus ADV / join packets at full strength.
constexpr double kBogusAdvMean = 15.0;
constexpr double kBogusJoinMean = 10.0;
constexpr double kDeceptiveCollision = 1.2;
constexpr double kDeceptiveDefer = 2.0;

int poisson(double mean, double u) {
    if (mean <= 0.0) return 0;
    int k = 0;
    double p = std::exp(-mean);
    double cdf = p;
    while (u > cdf && k < 1000) {
        ++k;
        p *= mean / k;
        cdf += p;
    }
    return k;
}

enum class Packet { Control, Data };

struct Counters {
    double energy = 0.0;
    double adv_ch_sent = 0, adv_sch_sent = 0, data_sent_to_bs = 0, data_received = 0;
    double adv_ch_received = 0, join_req_received = 0;
    double dist_to_ch = 0, join_sent = 0, data_sent = 0, retries = 0, rank = 0, sch_received = 0;
    double dropped = 0, cluster_size = 0;
};

}  // namespace

Simulator::Simulator(LeachConfig cfg, std::vector<JammerConfig> jammers)
    : cfg_(std::move(cfg)), jammers_(std::move(jammers)) {
    cfg_.validate();
    for (const auto& j : jammers_) j.validate();
    const std::uint64_t base = derive_seed(cfg_.seed, Stream::Simulation);
    draw_seed_ = splitmix64(base ^ 0x5eedULL);

    Rng placement(base);
    nodes_.resize(static_cast<std::size_t>(cfg_.num_nodes));
    for (int i = 0; i < cfg_.num_nodes; ++i) {
        auto& n = nodes_[static_cast<std::size_t>(i)];
        n.id = i;
        n.position.x = placement.uniform(0.0, cfg_.field_size);
        n.position.y = placement.uniform(0.0, cfg_.field_size);
        n.energy = cfg_.initial_energy;
    }

    timelines_.resize(jammers_.size());
    for (std::size_t j = 0; j < jammers_.size(); ++j) {
        if (jammers_[j].kind != JammerKind::Random) continue;
        Rng rng(splitmix64(base ^ splitmix64(0x7a11ULL + j)));
        double t = 0.0;
        bool on = false;
        const double horizon = static_cast<double>(cfg_.rounds) + 1.0;
        while (t < horizon) {
            t += rng.exponential(on ? jammers_[j].jam_mean : jammers_[j].sleep_mean);
            timelines_[j].toggles.push_back(t);
            on = !on;
        }
    }
}

double Simulator::total_energy() const {
    double e = 0.0;
    for (const auto& n : nodes_) e += n.energy;
    return e;
}

std::vector<FeatureRecord> Simulator::run_round() {
    const int r = round_;
    const auto N = nodes_.size();
    const auto& radio = cfg_.radio;
    const int F = cfg_.frames_per_round;

    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < N; ++i)
        if (nodes_[i].alive()) alive.push_back(i);
    if (alive.empty()) throw DeadNetworkError("all nodes are depleted at round " + std::to_string(r));

    trace_ = RoundTrace{};
    trace_.round = r;
    trace_.total_energy_before = total_energy();

    auto draw = [&](std::size_t node, std::uint64_t tag, std::uint64_t k = 0, std::uint64_t k2 = 0) {
        return hashed_uniform(draw_seed_, static_cast<std::uint64_t>(r), node * 64 + tag, k, k2);
    };

    // Jammer activity this round.
    const auto J = jammers_.size();
    trace_.jammer_active.assign(J, false);
    trace_.affected.assign(J, {});
    for (std::size_t j = 0; j < J; ++j) {
        const auto& jm = jammers_[j];
        if (!jm.scheduled(r)) continue;
        bool active = true;
        if (jm.kind == JammerKind::Random) {
            active = timelines_[j].any_on(r, r + 1.0);
        } else if (jm.kind == JammerKind::Reactive) {
            // Every live node transmits at least once per round, so channel activity
            // within sensing range is equivalent to a live node being in that range.
            const double range = jm.sensing_range();
            active = std::any_of(alive.begin(), alive.end(),
                                 [&](std::size_t i) { return distance(nodes_[i].position, jm.position) <= range; });
        }
        trace_.jammer_active[j] = active;
    }

    // Per node, per jammer strength in [0, power]; zero outside the radius or when idle.
    std::vector<std::vector<double>> strength(N, std::vector<double>(J, 0.0));
    std::vector<Label> labels(N, Label::Normal);
    for (std::size_t i : alive) {
        double best_rx = 0.0;
        for (std::size_t j = 0; j < J; ++j) {
            if (!trace_.jammer_active[j]) continue;
            const auto& jm = jammers_[j];
            const double d = distance(nodes_[i].position, jm.position);
            if (d >= jm.radius) continue;
            strength[i][j] = jm.power * (1.0 - 0.5 * (d / jm.radius) * (d / jm.radius));
            trace_.affected[j].push_back(static_cast<int>(i));
            const double rx = jm.power / (1.0 + (d / 10.0) * (d / 10.0));
            if (rx > best_rx) {
                best_rx = rx;
                labels[i] = label_for(jm.kind);
            }
        }
    }

    // Corruption probability a node suffers for a packet at in-round time t.
    auto jam_loss = [&](std::size_t i, Packet pkt, double t) {
        double pass = 1.0;
        for (std::size_t j = 0; j < J; ++j) {
            const double s = strength[i][j];
            if (s <= 0.0) continue;
            switch (jammers_[j].kind) {
                case JammerKind::Constant: break;
                case JammerKind::Random:
                    if (!timelines_[j].on_at(r + t)) continue;
                    break;
                case JammerKind::Deceptive:
                    // bogus traffic collides with control exchanges only
                    if (pkt != Packet::Control) continue;
                    pass *= std::exp(-kDeceptiveCollision * s);
                    continue;
                case JammerKind::Reactive:
                    if (pkt != Packet::Data) continue;
                    break;
            }
            pass *= std::exp(-s);
        }
        return 1.0 - pass;
    };

    // Probability a sender backs off a whole frame because bogus traffic holds the channel.
    auto defer_prob = [&](std::size_t i) {
        double pass = 1.0;
        for (std::size_t j = 0; j < J; ++j)
            if (jammers_[j].kind == JammerKind::Deceptive && strength[i][j] > 0.0)
                pass *= std::exp(-kDeceptiveDefer * strength[i][j]);
        return 1.0 - pass;
    };

    std::vector<Counters> ctr(N);
    auto tx_cost = [&](int bits, double d) { return bits * (radio.e_elec + radio.eps_fs * d * d); };
    auto rx_cost = [&](int bits) { return bits * radio.e_elec; };

    struct Attempt {
        int attempts;
        bool acked;
        bool delivered;
    };
    // Unicast with retries; sender i, receiver rcv (npos for the BS). Returns attempts and success.
    constexpr std::size_t kBs = static_cast<std::size_t>(-1);
    auto unicast = [&](std::size_t i, std::size_t rcv, Packet pkt, int bits, double d, std::uint64_t tag,
                       std::uint64_t key, double t) {
        const int max_attempts = 1 + radio.max_retries;
        for (int a = 0; a < max_attempts; ++a) {
            ctr[i].energy += tx_cost(bits, d);
            if (rcv != kBs) ctr[rcv].energy += rx_cost(bits);
            double fail = 1.0 - (1.0 - radio.base_loss) * (1.0 - jam_loss(i, pkt, t));
            // control exchanges are acknowledged; data frames lost at a jammed receiver are not retried
            const double rx_loss = rcv == kBs ? 0.0 : jam_loss(rcv, pkt, t);
            if (pkt == Packet::Control) fail = 1.0 - (1.0 - fail) * (1.0 - rx_loss);
            if (draw(i, tag, key, static_cast<std::uint64_t>(a)) >= fail) {
                const bool delivered = pkt == Packet::Control || draw(i, tag, key, 100 + a) >= rx_loss;
                return Attempt{a + 1, true, delivered};
            }
        }
        return Attempt{max_attempts, false, false};
    };

    // 1. Cluster-head election.
    std::vector<std::size_t> heads;
    for (std::size_t i : alive) {
        auto& n = nodes_[i];
        n.is_ch = ch_election(n, cfg_, r, draw(i, kElect));
        n.cluster_id = -1;
        if (n.is_ch) {
            n.last_ch_round = r;
            n.cluster_id = n.id;
            heads.push_back(i);
            trace_.cluster_heads.push_back(n.id);
        }
    }

    // 2. ADV_CH broadcast across the field; members keep the nearest CH they heard.
    const double broadcast_range = cfg_.field_size * std::sqrt(2.0);
    for (std::size_t h : heads) {
        ctr[h].energy += tx_cost(radio.ctrl_bits, broadcast_range);
        ctr[h].adv_ch_sent += 1;
    }
    std::vector<std::size_t> chosen(N, kBs);
    for (std::size_t i : alive) {
        if (nodes_[i].is_ch) continue;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < heads.size(); ++k) {
            const std::size_t h = heads[k];
            ctr[i].energy += rx_cost(radio.ctrl_bits);
            const double t = draw(i, kAttemptTime, 1000 + k);
            const double fail = 1.0 - (1.0 - radio.base_loss) * (1.0 - jam_loss(i, Packet::Control, t));
            if (draw(i, kAdvRx, k) < fail) continue;
            ctr[i].adv_ch_received += 1;
            const double d = distance(nodes_[i].position, nodes_[h].position);
            if (d < best) {
                best = d;
                chosen[i] = h;
            }
        }
    }

    // Deceptive jammers inject legitimate-looking ADV and join traffic.
    for (std::size_t i : alive) {
        for (std::size_t j = 0; j < J; ++j) {
            if (jammers_[j].kind != JammerKind::Deceptive || strength[i][j] <= 0.0) continue;
            if (nodes_[i].is_ch) {
                const int bogus = poisson(kBogusJoinMean * strength[i][j], draw(i, kBogusJoin, j));
                ctr[i].join_req_received += bogus;
                ctr[i].energy += bogus * rx_cost(radio.ctrl_bits);
            } else {
                const int bogus = poisson(kBogusAdvMean * strength[i][j], draw(i, kBogusAdv, j));
                ctr[i].adv_ch_received += bogus;
                ctr[i].energy += bogus * rx_cost(radio.ctrl_bits);
            }
        }
    }

    // 3. Join requests.
    std::vector<std::vector<std::size_t>> members(N);
    for (std::size_t i : alive) {
        if (nodes_[i].is_ch || chosen[i] == kBs) continue;
        const std::size_t h = chosen[i];
        const double d = distance(nodes_[i].position, nodes_[h].position);
        const auto [attempts, ok, delivered] =
            unicast(i, h, Packet::Control, radio.ctrl_bits, d, kJoinTx, 0, draw(i, kAttemptTime, 2000));
        ctr[i].join_sent += attempts;
        ctr[i].retries += attempts - 1;
        if (ok) {
            ctr[h].join_req_received += 1;
            members[h].push_back(i);
            nodes_[i].cluster_id = nodes_[h].id;
            ctr[i].dist_to_ch = d;
        } else {
            chosen[i] = kBs;
        }
    }

    // 4. TDMA schedules.
    std::vector<bool> has_schedule(N, false);
    for (std::size_t h : heads) {
        if (members[h].empty()) continue;
        ctr[h].adv_sch_sent += 1;
        double far = 0.0;
        for (std::size_t m : members[h]) far = std::max(far, distance(nodes_[m].position, nodes_[h].position));
        ctr[h].energy += tx_cost(radio.ctrl_bits, far);
        ctr[h].cluster_size = static_cast<double>(members[h].size());
        for (std::size_t slot = 0; slot < members[h].size(); ++slot) {
            const std::size_t m = members[h][slot];
            ctr[m].energy += rx_cost(radio.ctrl_bits);
            ctr[m].rank = static_cast<double>(slot + 1);
            ctr[m].cluster_size = static_cast<double>(members[h].size());
            const double t = draw(m, kAttemptTime, 3000);
            const double fail = 1.0 - (1.0 - radio.base_loss) * (1.0 - jam_loss(m, Packet::Control, t));
            if (draw(m, kSchRx) >= fail) {
                has_schedule[m] = true;
                ctr[m].sch_received = 1;
            }
        }
    }

    // 5. Data frames: members to their CH, orphans straight to the BS.
    for (std::size_t i : alive) {
        if (nodes_[i].is_ch) continue;
        const std::size_t h = chosen[i];
        for (int f = 0; f < F; ++f) {
            const double t = (f + draw(i, kAttemptTime, 4000 + static_cast<std::uint64_t>(f))) / F;
            if (draw(i, kDefer, static_cast<std::uint64_t>(f)) < defer_prob(i)) {
                ctr[i].dropped += 1;
                continue;
            }
            if (h != kBs) {
                if (!has_schedule[i]) {
                    ctr[i].dropped += 1;
                    continue;
                }
                const double d = distance(nodes_[i].position, nodes_[h].position);
                const auto [attempts, ok, delivered] =
                    unicast(i, h, Packet::Data, radio.data_bits, d, kDataTx, static_cast<std::uint64_t>(f), t);
                ctr[i].data_sent += attempts;
                ctr[i].retries += attempts - 1;
                if (!ok) ctr[i].dropped += 1;
                if (delivered) ctr[h].data_received += 1;
            } else {
                const double d = distance(nodes_[i].position, cfg_.bs_position);
                const auto [attempts, ok, delivered] =
                    unicast(i, kBs, Packet::Data, radio.data_bits, d, kBsTx, static_cast<std::uint64_t>(f), t);
                ctr[i].data_sent += attempts;
                ctr[i].data_sent_to_bs += attempts;
                ctr[i].retries += attempts - 1;
                if (!ok) ctr[i].dropped += 1;
            }
        }
    }

    // 6. CH aggregation and uplink.
    for (std::size_t h : heads) {
        const double d = distance(nodes_[h].position, cfg_.bs_position);
        ctr[h].energy += radio.e_da * radio.data_bits * (ctr[h].data_received + F);
        for (int f = 0; f < F; ++f) {
            const double t = (f + draw(h, kAttemptTime, 5000 + static_cast<std::uint64_t>(f))) / F;
            if (draw(h, kDefer, static_cast<std::uint64_t>(f)) < defer_prob(h)) {
                ctr[h].dropped += 1;
                continue;
            }
            const auto [attempts, ok, delivered] =
                unicast(h, kBs, Packet::Data, radio.data_bits, d, kBsTx, static_cast<std::uint64_t>(f), t);
            ctr[h].data_sent_to_bs += attempts;
            ctr[h].data_sent += attempts;
            ctr[h].retries += attempts - 1;
            if (!ok) ctr[h].dropped += 1;
        }
    }

    // 7. Idle drain, energy debit and records.
    std::vector<FeatureRecord> records;
    records.reserve(alive.size());
    for (std::size_t i : alive) {
        auto& n = nodes_[i];
        auto& c = ctr[i];
        c.energy += radio.idle_cost;
        const double spent = std::min(c.energy, n.energy);
        n.energy -= spent;

        FeatureRecord rec;
        rec[Feature::EnergyConsumed] = spent;
        rec[Feature::IsCh] = n.is_ch ? 1.0 : 0.0;
        rec[Feature::AdvChSent] = c.adv_ch_sent;
        rec[Feature::AdvSchSent] = c.adv_sch_sent;
        rec[Feature::DataSentToBs] = c.data_sent_to_bs;
        rec[Feature::DistChToBs] = n.is_ch ? distance(n.position, cfg_.bs_position) : 0.0;
        rec[Feature::DataReceived] = c.data_received;
        rec[Feature::AdvChReceived] = c.adv_ch_received;
        rec[Feature::JoinReqReceived] = c.join_req_received;
        rec[Feature::Time] = cfg_.round_duration * (r + draw(i, kTime));

        auto extra = [&rec](int k) -> double& { return rec.values[kNumNamedFeatures + k]; };
        extra(kExtraDistToCh) = c.dist_to_ch;
        extra(kExtraJoinSent) = c.join_sent;
        extra(kExtraDataSent) = c.data_sent;
        extra(kExtraRetries) = c.retries;
        extra(kExtraRank) = c.rank;
        extra(kExtraSchReceived) = c.sch_received;
        extra(kExtraResidual) = n.energy;
        extra(kExtraDropped) = c.dropped;
        extra(kExtraClusterSize) = c.cluster_size;
        for (int k = 0; kExtraNoise0 + k < kNumExtraFeatures; ++k) {
            const double u1 = std::max(draw(i, kNoise, static_cast<std::uint64_t>(k), 0), 1e-300);
            const double u2 = draw(i, kNoise, static_cast<std::uint64_t>(k), 1);
            extra(kExtraNoise0 + k) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        }
        rec.label = labels[i];
        records.push_back(rec);
    }

    trace_.total_energy_after = total_energy();
    ++round_;
    return records;
}

Dataset generate_dataset(const LeachConfig& cfg, const std::vector<JammerConfig>& jammers,
                         SimulationReport* report) {
    Simulator sim(cfg, jammers);
    std::vector<FeatureRecord> all;
    int played = 0;
    for (int r = 0; r < cfg.rounds; ++r) {
        bool any_alive = std::any_of(sim.nodes().begin(), sim.nodes().end(), [](const NodeState& n) { return n.alive(); });
        if (!any_alive) break;
        auto recs = sim.run_round();
        all.insert(all.end(), recs.begin(), recs.end());
        ++played;
    }
    Dataset ds(simulator_column_names(), std::move(all));
    if (report) {
        report->class_counts = ds.class_counts();
        report->rounds_played = played;
        report->final_energy = sim.total_energy();
    }
    return ds;
}

std::vector<std::string> simulator_column_names() {
    std::vector<std::string> names(named_feature_names().begin(), named_feature_names().end());
    for (const char* extra : {"dist_to_ch", "join_req_sent", "data_sent", "retransmissions", "tdma_rank",
                              "sch_received", "residual_energy", "packets_dropped", "cluster_size", "noise_0",
                              "noise_1", "noise_2", "noise_3"})
        names.emplace_back(extra);
    return names;
}

}  // namespace jamids

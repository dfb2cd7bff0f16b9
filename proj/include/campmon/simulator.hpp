#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "campmon/aggregation.hpp"
#include "campmon/types.hpp"

namespace campmon {

enum class IncidentKind { Transient, Persistent };

std::string to_string(IncidentKind k);
IncidentKind incident_kind_from_string(const std::string& s);

// A ground-truth outage: campaigns in scope have their metric multiplied
// by (1 - severity) over [start, start + duration).
struct IncidentSpec {
    Timestamp start = 0;
    int duration_hours = 0;
    double severity = 1.0;  // in (0, 1]
    IncidentKind kind = IncidentKind::Transient;
    std::vector<ClusterKey> scope;

    Timestamp end() const { return start + hours(duration_hours); }
    bool covers(Timestamp hour) const { return hour >= start && hour < end(); }
};

// Which hours of which cluster fall inside an injected incident. The
// positive differencing echo one period later is deliberately not listed.
struct GroundTruth {
    std::map<ClusterKey, std::set<Timestamp>> anomalous_hours;

    const std::set<Timestamp>& hours_for(const ClusterKey& key) const;
};

enum class Behavior {
    Seasonal,    // daily/weekly profile with mild noise
    HeavyNoise,  // no usable signature, dominated by noise
    LevelWalk,   // hourly random-walk level, shape not preserved
    Flat,        // constant output, zero variance
};

std::string to_string(Behavior b);

struct BehaviorParams {
    double base = 100.0;
    double diurnal_amp = 0.4;
    double diurnal_phase = 0.0;       // hours
    std::array<double, 7> weekday{1, 1, 1, 1, 1, 1, 1};
    double noise_sigma = 0.05;        // lognormal, per hour
    double walk_sigma = 0.0;          // random-walk step, LevelWalk only
};

struct SimCampaign {
    CampaignRecord record;
    Behavior behavior = Behavior::Seasonal;
    BehaviorParams params;
    bool expect_stable = false;
};

struct ScenarioSpec {
    std::string name = "default";
    std::string metric = "campaign.delivery";
    int campaigns = 100;
    double stable_fraction = 0.5;
    Timestamp start_hour = 1417640400;
    int horizon_hours = 2353;
    std::uint64_t seed = 42;
    double base_level = 100.0;
    double common_noise_sigma = 0.02;  // traffic noise shared by all campaigns
    std::vector<IncidentSpec> incidents;

    Timestamp end_hour() const { return start_hour + hours(horizon_hours); }
    void validate() const;
};

// Flat `key = value` text plus one `incident = <offset_h> <duration_h>
// <severity> <kind> <scope,...>` line per incident.
ScenarioSpec parse_scenario(const std::string& text);
ScenarioSpec load_scenario(const std::string& path);

// Deterministic portfolio: round(n * stable_fraction) campaigns are
// engineered stable, the rest cycle through setup violations and
// non-correlated behaviors. Established campaigns start at least
// min_history_days before now. Throws Error when n <= 0.
std::vector<SimCampaign> generate_portfolio(int n, double stable_fraction, std::uint64_t seed,
                                            Timestamp now, double base_level = 100.0,
                                            int min_history_days = 100);

// Hourly metric over [start_hour, start_hour + horizon_hours). Pure in
// (campaign, range, seed); campaigns draw from independent substreams so
// generation order cannot change the output.
HourlySeries simulate_metric(const SimCampaign& c, Timestamp start_hour, int horizon_hours,
                             std::uint64_t seed, double common_noise_sigma = 0.0);

// Deterministic standard normal keyed by (seed, counter).
double gaussian_at(std::uint64_t seed, std::uint64_t counter);

struct SimulatedData {
    ScenarioSpec scenario;
    std::vector<SimCampaign> campaigns;
    std::map<std::string, HourlySeries> series;  // by campaign id
};

// Portfolio plus per-campaign streams, incidents not yet applied.
SimulatedData simulate(const ScenarioSpec& scenario);

// Suppresses affected campaigns in place and derives the ground truth.
// Throws Error on a spec outside the simulated range.
GroundTruth inject_incidents(SimulatedData& data, const std::vector<IncidentSpec>& specs);

// CSV: `cluster,hour`
void write_truth_csv(const std::string& path, const GroundTruth& truth);
GroundTruth read_truth_csv(const std::string& path);

// CSV: `start,duration_hours,severity,kind,scope` (scope |-joined)
void write_incidents_csv(const std::string& path, const std::vector<IncidentSpec>& incidents);
std::vector<IncidentSpec> read_incidents_csv(const std::string& path);

// CSV: `id,behavior,expect_stable`
void write_sim_labels_csv(const std::string& path, const std::vector<SimCampaign>& campaigns);
std::map<std::string, bool> read_sim_labels_csv(const std::string& path);

} // namespace campmon

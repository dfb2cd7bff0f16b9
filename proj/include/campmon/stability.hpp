#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "campmon/config.hpp"
#include "campmon/types.hpp"

namespace campmon {

// Snapshot of the campaigns whose setup and behavior both passed at
// computed_at, together with the config that produced it.
struct StableSet {
    std::set<std::string> campaign_ids;
    Timestamp computed_at = 0;
    PipelineConfig config;

    bool contains(const std::string& id) const { return campaign_ids.count(id) > 0; }
};

// Setup rules: US Dollar currency, Active status, running longer than
// min_duration_days, and not past its end date.
bool check_setup(const CampaignRecord& c, Timestamp now, int min_duration_days);

// The l hourly values ending at end_hour inclusive; absent when any slot
// in the range is a gap or out of range.
std::optional<std::vector<double>> window_vector(const HourlySeries& s, Timestamp end_hour, int l);

// Sample Pearson correlation; absent when either vector has zero
// variance. Throws Error on length mismatch or length < 2.
std::optional<double> pearson_correlation(const std::vector<double>& v1,
                                          const std::vector<double>& v2);

// True iff for every p in cfg.p_values the window ending x hours before
// now correlates above delta with the window one p-day period earlier.
bool is_stable(const HourlySeries& series, Timestamp now, const PipelineConfig& cfg);

// Campaigns passing both check_setup and is_stable. Campaigns without a
// series are excluded with a warning. Deterministic in its inputs.
StableSet refresh_stable_set(const std::vector<CampaignRecord>& portfolio,
                             const std::map<std::string, HourlySeries>& series_by_id,
                             Timestamp now, const PipelineConfig& cfg,
                             std::vector<std::string>* warnings = nullptr);

// One campaign id per line; header comment carries computed_at and the
// config hash.
void write_stable_set(const std::string& path, const StableSet& s);
std::set<std::string> read_stable_set(const std::string& path);

} // namespace campmon

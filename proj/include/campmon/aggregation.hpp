#pragma once

#include <map>
#include <string>
#include <vector>

#include "campmon/types.hpp"

namespace campmon {

struct StableSet;

// One monitored aggregate: either all campaigns sharing a targeting
// criterion or all campaigns on a media channel. 6 + 4 = 10 keys total.
struct ClusterKey {
    enum class Kind { Targeting, Channel };

    Kind kind = Kind::Channel;
    TargetingCriterion targeting = TargetingCriterion::Demographic;
    MediaChannel channel = MediaChannel::Display;

    static ClusterKey of(TargetingCriterion t) { return {Kind::Targeting, t, MediaChannel::Display}; }
    static ClusterKey of(MediaChannel c) { return {Kind::Channel, TargetingCriterion::Demographic, c}; }

    // `targeting:<criterion>` / `channel:<channel>`
    std::string to_string() const;
    // Filesystem-safe variant with '_' instead of ':'.
    std::string file_stem() const;
    static ClusterKey from_string(const std::string& s);

    friend auto operator<=>(const ClusterKey&, const ClusterKey&) = default;
};

const std::vector<ClusterKey>& all_cluster_keys();

// Every cluster the campaign contributes to: one per targeting criterion
// plus its channel.
std::vector<ClusterKey> clusters_of(const CampaignRecord& c);

// Sum of raw values per UTC hour; hours without points are gaps.
HourlySeries downsample_hourly(const RawSeries& raw);

// Slot-wise sum over the stable members of a cluster. A member gap
// contributes 0; a slot is a gap only when every member gaps there.
// Empty membership yields an empty series and a warning.
HourlySeries aggregate_cluster(const StableSet& stable, const ClusterKey& key,
                               const std::vector<CampaignRecord>& portfolio,
                               const std::map<std::string, HourlySeries>& per_campaign,
                               std::vector<std::string>* warnings = nullptr);

// Hourly seasonal-difference series d_t = m_t - m_{t - 24p hours}.
struct ChangeMetric {
    ClusterKey cluster;
    int p_days = 7;
    HourlySeries series;
};

// d_t present only where both operands are; a series shorter than 24p
// hours yields an all-absent metric and a warning.
ChangeMetric change_metric(const HourlySeries& m, int p_days, const ClusterKey& cluster,
                           std::vector<std::string>* warnings = nullptr);

// CSV: `hour,value`, absent slots written with an empty value field.
// The change-metric variant prefixes `# cluster=...` and `# p=...` lines.
void write_hourly_csv(const std::string& path, const HourlySeries& s);
void write_change_metric_csv(const std::string& path, const ChangeMetric& cm);

} // namespace campmon

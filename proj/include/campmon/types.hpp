#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "campmon/errors.hpp"
#include "campmon/time.hpp"

namespace campmon {

enum class CampaignStatus { Active, Paused, Stopped };

enum class TargetingCriterion {
    Demographic,
    Contextual,
    Behavioral,
    Dayparting,
    Device,
    SiteList,
};

enum class MediaChannel { Display, Video, Mobile, Social };

constexpr int kTargetingCriterionCount = 6;
constexpr int kMediaChannelCount = 4;

std::string to_string(CampaignStatus s);
std::string to_string(TargetingCriterion t);
std::string to_string(MediaChannel c);
CampaignStatus status_from_string(const std::string& s);
TargetingCriterion targeting_from_string(const std::string& s);
MediaChannel channel_from_string(const std::string& s);

const std::vector<TargetingCriterion>& all_targeting_criteria();
const std::vector<MediaChannel>& all_media_channels();

// One monitored entity's configuration.
struct CampaignRecord {
    std::string id;
    std::string currency;     // ISO-4217 code
    CampaignStatus status = CampaignStatus::Active;
    Timestamp start = 0;
    std::optional<Timestamp> end;
    std::set<TargetingCriterion> targeting;  // non-empty
    MediaChannel channel = MediaChannel::Display;

    // Throws Error if invariants fail (start < end when set, non-empty targeting).
    void validate() const;
};

// Timestamped samples of one metric for one campaign or cluster.
struct RawSeries {
    std::string metric;
    std::map<std::string, std::string> tags;
    std::vector<std::pair<Timestamp, double>> points;  // strictly increasing ts
};

// One optional value per hour; absent slot = gap. No trailing gaps.
struct HourlySeries {
    Timestamp start_hour = 0;  // multiple of 3600
    std::vector<std::optional<double>> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    Timestamp hour_at(std::size_t i) const {
        return start_hour + static_cast<Timestamp>(i) * kSecondsPerHour;
    }
    // Hour of the last slot; series must be non-empty.
    Timestamp end_hour() const { return hour_at(values.size() - 1); }

    // Value at an hour timestamp; absent when outside the covered range,
    // not hour-aligned, or a gap.
    std::optional<double> at_hour(Timestamp t) const;

    void trim_trailing_gaps();
};

HourlySeries hourly_from_map(const std::map<Timestamp, double>& by_hour);

// Portfolio persistence: header `id,currency,status,start,end,targeting,channel`,
// targeting |-joined, empty end for open-ended campaigns.
void write_portfolio_csv(const std::string& path, const std::vector<CampaignRecord>& portfolio);
std::vector<CampaignRecord> read_portfolio_csv(const std::string& path);

} // namespace campmon

#include "campmon/aggregation.hpp"

#include <algorithm>
#include <fstream>

#include "campmon/errors.hpp"
#include "campmon/stability.hpp"
#include "campmon/tsdb.hpp"

namespace campmon {

std::string ClusterKey::to_string() const {
    if (kind == Kind::Targeting) return "targeting:" + campmon::to_string(targeting);
    return "channel:" + campmon::to_string(channel);
}

std::string ClusterKey::file_stem() const {
    std::string s = to_string();
    std::replace(s.begin(), s.end(), ':', '_');
    return s;
}

ClusterKey ClusterKey::from_string(const std::string& s) {
    std::size_t sep = s.find(':');
    if (sep == std::string::npos) throw Error("bad cluster key: " + s);
    std::string kind = s.substr(0, sep);
    std::string value = s.substr(sep + 1);
    if (kind == "targeting") return ClusterKey::of(targeting_from_string(value));
    if (kind == "channel") return ClusterKey::of(channel_from_string(value));
    throw Error("bad cluster key: " + s);
}

const std::vector<ClusterKey>& all_cluster_keys() {
    static const std::vector<ClusterKey> all = [] {
        std::vector<ClusterKey> keys;
        for (TargetingCriterion t : all_targeting_criteria()) keys.push_back(ClusterKey::of(t));
        for (MediaChannel c : all_media_channels()) keys.push_back(ClusterKey::of(c));
        return keys;
    }();
    return all;
}

std::vector<ClusterKey> clusters_of(const CampaignRecord& c) {
    std::vector<ClusterKey> out;
    out.reserve(c.targeting.size() + 1);
    for (TargetingCriterion t : c.targeting) out.push_back(ClusterKey::of(t));
    out.push_back(ClusterKey::of(c.channel));
    return out;
}

HourlySeries downsample_hourly(const RawSeries& raw) {
    std::map<Timestamp, double> sums;
    for (const auto& [ts, value] : raw.points) sums[hour_floor(ts)] += value;
    return hourly_from_map(sums);
}

HourlySeries aggregate_cluster(const StableSet& stable, const ClusterKey& key,
                               const std::vector<CampaignRecord>& portfolio,
                               const std::map<std::string, HourlySeries>& per_campaign,
                               std::vector<std::string>* warnings) {
    std::vector<const HourlySeries*> members;
    for (const auto& c : portfolio) {
        if (!stable.contains(c.id)) continue;
        auto keys = clusters_of(c);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) continue;
        auto it = per_campaign.find(c.id);
        if (it == per_campaign.end() || it->second.empty()) continue;
        members.push_back(&it->second);
    }
    if (members.empty()) {
        if (warnings)
            warnings->push_back("cluster " + key.to_string() + " has no members with data");
        return {};
    }

    Timestamp lo = members[0]->start_hour;
    Timestamp hi = members[0]->end_hour();
    for (const HourlySeries* m : members) {
        lo = std::min(lo, m->start_hour);
        hi = std::max(hi, m->end_hour());
    }

    HourlySeries out;
    out.start_hour = lo;
    std::size_t n = static_cast<std::size_t>((hi - lo) / kSecondsPerHour) + 1;
    out.values.assign(n, std::nullopt);
    for (std::size_t i = 0; i < n; ++i) {
        Timestamp hour = out.hour_at(i);
        double sum = 0.0;
        bool any = false;
        for (const HourlySeries* m : members) {
            if (auto v = m->at_hour(hour)) {
                sum += *v;
                any = true;
            }
        }
        if (any) out.values[i] = sum;
    }
    out.trim_trailing_gaps();
    return out;
}

ChangeMetric change_metric(const HourlySeries& m, int p_days, const ClusterKey& cluster,
                           std::vector<std::string>* warnings) {
    if (p_days <= 0) throw Error("change_metric: p must be positive");
    ChangeMetric cm;
    cm.cluster = cluster;
    cm.p_days = p_days;

    std::size_t lag = static_cast<std::size_t>(p_days) * 24;
    if (m.size() <= lag) {
        if (warnings)
            warnings->push_back("cluster " + cluster.to_string() + ": series of " +
                                std::to_string(m.size()) + " hours too short for p=" +
                                std::to_string(p_days));
        return cm;
    }

    cm.series.start_hour = m.start_hour + days(p_days);
    cm.series.values.reserve(m.size() - lag);
    for (std::size_t i = lag; i < m.size(); ++i) {
        if (m.values[i] && m.values[i - lag]) {
            cm.series.values.push_back(*m.values[i] - *m.values[i - lag]);
        } else {
            cm.series.values.push_back(std::nullopt);
        }
    }
    cm.series.trim_trailing_gaps();
    return cm;
}

void write_hourly_csv(const std::string& path, const HourlySeries& s) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    out << "hour,value\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << s.hour_at(i) << ',';
        if (s.values[i]) out << format_value(*s.values[i]);
        out << '\n';
    }
    if (!out) throw IoError("write failed", path);
}

void write_change_metric_csv(const std::string& path, const ChangeMetric& cm) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    out << "# cluster=" << cm.cluster.to_string() << '\n';
    out << "# p=" << cm.p_days << '\n';
    out << "hour,value\n";
    for (std::size_t i = 0; i < cm.series.size(); ++i) {
        out << cm.series.hour_at(i) << ',';
        if (cm.series.values[i]) out << format_value(*cm.series.values[i]);
        out << '\n';
    }
    if (!out) throw IoError("write failed", path);
}

} // namespace campmon

#include "campmon/types.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "campmon/errors.hpp"
#include "campmon/hash.hpp"

namespace campmon {

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string to_string(CampaignStatus s) {
    switch (s) {
        case CampaignStatus::Active: return "active";
        case CampaignStatus::Paused: return "paused";
        case CampaignStatus::Stopped: return "stopped";
    }
    return "?";
}

std::string to_string(TargetingCriterion t) {
    switch (t) {
        case TargetingCriterion::Demographic: return "demographic";
        case TargetingCriterion::Contextual: return "contextual";
        case TargetingCriterion::Behavioral: return "behavioral";
        case TargetingCriterion::Dayparting: return "dayparting";
        case TargetingCriterion::Device: return "device";
        case TargetingCriterion::SiteList: return "site_list";
    }
    return "?";
}

std::string to_string(MediaChannel c) {
    switch (c) {
        case MediaChannel::Display: return "display";
        case MediaChannel::Video: return "video";
        case MediaChannel::Mobile: return "mobile";
        case MediaChannel::Social: return "social";
    }
    return "?";
}

CampaignStatus status_from_string(const std::string& s) {
    if (s == "active") return CampaignStatus::Active;
    if (s == "paused") return CampaignStatus::Paused;
    if (s == "stopped") return CampaignStatus::Stopped;
    throw Error("unknown campaign status: " + s);
}

TargetingCriterion targeting_from_string(const std::string& s) {
    for (TargetingCriterion t : all_targeting_criteria())
        if (to_string(t) == s) return t;
    throw Error("unknown targeting criterion: " + s);
}

MediaChannel channel_from_string(const std::string& s) {
    for (MediaChannel c : all_media_channels())
        if (to_string(c) == s) return c;
    throw Error("unknown media channel: " + s);
}

const std::vector<TargetingCriterion>& all_targeting_criteria() {
    static const std::vector<TargetingCriterion> all{
        TargetingCriterion::Demographic, TargetingCriterion::Contextual,
        TargetingCriterion::Behavioral,  TargetingCriterion::Dayparting,
        TargetingCriterion::Device,      TargetingCriterion::SiteList,
    };
    return all;
}

const std::vector<MediaChannel>& all_media_channels() {
    static const std::vector<MediaChannel> all{
        MediaChannel::Display, MediaChannel::Video,
        MediaChannel::Mobile,  MediaChannel::Social,
    };
    return all;
}

void CampaignRecord::validate() const {
    if (id.empty()) throw Error("campaign id must not be empty");
    if (start < 0) throw Error("campaign " + id + ": negative start");
    if (end && *end <= start) throw Error("campaign " + id + ": end not after start");
    if (targeting.empty()) throw Error("campaign " + id + ": empty targeting set");
}

std::optional<double> HourlySeries::at_hour(Timestamp t) const {
    if (empty() || t < start_hour) return std::nullopt;
    Timestamp offset = t - start_hour;
    if (offset % kSecondsPerHour != 0) return std::nullopt;
    std::size_t idx = static_cast<std::size_t>(offset / kSecondsPerHour);
    if (idx >= values.size()) return std::nullopt;
    return values[idx];
}

void HourlySeries::trim_trailing_gaps() {
    while (!values.empty() && !values.back().has_value()) values.pop_back();
}

HourlySeries hourly_from_map(const std::map<Timestamp, double>& by_hour) {
    HourlySeries s;
    if (by_hour.empty()) return s;
    s.start_hour = by_hour.begin()->first;
    Timestamp last = by_hour.rbegin()->first;
    std::size_t n = static_cast<std::size_t>((last - s.start_hour) / kSecondsPerHour) + 1;
    s.values.assign(n, std::nullopt);
    for (const auto& [hour, value] : by_hour) {
        s.values[static_cast<std::size_t>((hour - s.start_hour) / kSecondsPerHour)] = value;
    }
    return s;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

std::int64_t parse_int64(const std::string& s, const std::string& what) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw Error("bad " + what + ": '" + s + "'");
    return v;
}

} // namespace

void write_portfolio_csv(const std::string& path, const std::vector<CampaignRecord>& portfolio) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    out << "id,currency,status,start,end,targeting,channel\n";
    for (const auto& c : portfolio) {
        out << c.id << ',' << c.currency << ',' << to_string(c.status) << ',' << c.start << ',';
        if (c.end) out << *c.end;
        out << ',';
        bool first = true;
        for (TargetingCriterion t : c.targeting) {
            if (!first) out << '|';
            out << to_string(t);
            first = false;
        }
        out << ',' << to_string(c.channel) << '\n';
    }
    if (!out) throw IoError("write failed", path);
}

std::vector<CampaignRecord> read_portfolio_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open", path);
    std::vector<CampaignRecord> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        auto cols = split(line, ',');
        if (cols.size() != 7) throw Error(path + ": bad portfolio row: " + line);
        CampaignRecord c;
        c.id = cols[0];
        c.currency = cols[1];
        c.status = status_from_string(cols[2]);
        c.start = parse_int64(cols[3], "start timestamp");
        if (!cols[4].empty()) c.end = parse_int64(cols[4], "end timestamp");
        for (const auto& t : split(cols[5], '|'))
            if (!t.empty()) c.targeting.insert(targeting_from_string(t));
        c.channel = channel_from_string(cols[6]);
        c.validate();
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace campmon

#include "campmon/stability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "campmon/errors.hpp"

namespace campmon {

bool check_setup(const CampaignRecord& c, Timestamp now, int min_duration_days) {
    if (c.currency != "USD") return false;
    if (c.status != CampaignStatus::Active) return false;
    if (now - c.start <= days(min_duration_days)) return false;
    if (c.end && *c.end <= now) return false;
    return true;
}

std::optional<std::vector<double>> window_vector(const HourlySeries& s, Timestamp end_hour, int l) {
    if (l <= 0) throw Error("window length must be positive");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(l));
    for (int i = l - 1; i >= 0; --i) {
        std::optional<double> v = s.at_hour(end_hour - hours(i));
        if (!v) return std::nullopt;
        out.push_back(*v);
    }
    return out;
}

std::optional<double> pearson_correlation(const std::vector<double>& v1,
                                          const std::vector<double>& v2) {
    if (v1.size() != v2.size()) throw Error("pearson_correlation: length mismatch");
    if (v1.size() < 2) throw Error("pearson_correlation: need at least 2 points");

    // A constant vector has zero sample variance even when the summed
    // mean below picks up roundoff, so catch it before the arithmetic.
    auto constant = [](const std::vector<double>& v) {
        auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *lo == *hi;
    };
    if (constant(v1) || constant(v2)) return std::nullopt;

    const double n = static_cast<double>(v1.size());
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < v1.size(); ++i) {
        m1 += v1[i];
        m2 += v2[i];
    }
    m1 /= n;
    m2 /= n;

    double cov = 0.0, var1 = 0.0, var2 = 0.0;
    for (std::size_t i = 0; i < v1.size(); ++i) {
        double d1 = v1[i] - m1;
        double d2 = v2[i] - m2;
        cov += d1 * d2;
        var1 += d1 * d1;
        var2 += d2 * d2;
    }
    if (var1 == 0.0 || var2 == 0.0) return std::nullopt;
    double r = cov / std::sqrt(var1 * var2);
    return std::clamp(r, -1.0, 1.0);
}

bool is_stable(const HourlySeries& series, Timestamp now, const PipelineConfig& cfg) {
    Timestamp end = hour_floor(now) - hours(cfg.x);
    auto v1 = window_vector(series, end, cfg.l);
    if (!v1) return false;
    for (int p : cfg.p_values) {
        auto v2 = window_vector(series, end - days(p), cfg.l);
        if (!v2) return false;
        auto c = pearson_correlation(*v1, *v2);
        if (!c || !(*c > cfg.delta)) return false;
    }
    return true;
}

StableSet refresh_stable_set(const std::vector<CampaignRecord>& portfolio,
                             const std::map<std::string, HourlySeries>& series_by_id,
                             Timestamp now, const PipelineConfig& cfg,
                             std::vector<std::string>* warnings) {
    StableSet out;
    out.computed_at = now;
    out.config = cfg;
    for (const auto& c : portfolio) {
        if (!check_setup(c, now, cfg.min_duration_days)) continue;
        auto it = series_by_id.find(c.id);
        if (it == series_by_id.end()) {
            if (warnings) warnings->push_back("no series for campaign " + c.id + ", excluded");
            continue;
        }
        if (is_stable(it->second, now, cfg)) out.campaign_ids.insert(c.id);
    }
    return out;
}

void write_stable_set(const std::string& path, const StableSet& s) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    out << "# computed_at=" << s.computed_at << '\n';
    out << "# config=" << s.config.hash() << '\n';
    for (const auto& id : s.campaign_ids) out << id << '\n';
    if (!out) throw IoError("write failed", path);
}

std::set<std::string> read_stable_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open", path);
    std::set<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        ids.insert(line);
    }
    return ids;
}

} // namespace campmon

#include "campmon/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "campmon/hash.hpp"
#include "campmon/tsdb.hpp"
#include "util.hpp"

namespace campmon {

std::string to_string(IncidentKind k) {
    return k == IncidentKind::Transient ? "transient" : "persistent";
}

IncidentKind incident_kind_from_string(const std::string& s) {
    if (s == "transient") return IncidentKind::Transient;
    if (s == "persistent") return IncidentKind::Persistent;
    throw Error("unknown incident kind: '" + s + "'");
}

std::string to_string(Behavior b) {
    switch (b) {
        case Behavior::Seasonal: return "seasonal";
        case Behavior::HeavyNoise: return "heavy_noise";
        case Behavior::LevelWalk: return "level_walk";
        case Behavior::Flat: return "flat";
    }
    throw Error("unknown behavior");
}

const std::set<Timestamp>& GroundTruth::hours_for(const ClusterKey& key) const {
    static const std::set<Timestamp> empty;
    auto it = anomalous_hours.find(key);
    return it == anomalous_hours.end() ? empty : it->second;
}

double gaussian_at(std::uint64_t seed, std::uint64_t counter) {
    // Two independent 64-bit draws keyed by (seed, counter), folded through
    // Box-Muller. Stateless, so simulation order can never change a sample.
    std::uint64_t base = seed + counter * 0x9e3779b97f4a7c15ull;
    std::uint64_t a = splitmix64(base);
    std::uint64_t b = splitmix64(base + 0x632be59bd9b4e019ull);
    // Map to (0, 1): 53-bit mantissa midpoints, never exactly 0 or 1.
    double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
    double u2 = (static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

// Uniform in [0, 1) on a per-purpose substream.
double uniform_at(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t base = seed + counter * 0x9e3779b97f4a7c15ull;
    return static_cast<double>(splitmix64(base) >> 11) * 0x1.0p-53;
}

std::uint64_t campaign_seed(std::uint64_t scenario_seed, const std::string& id) {
    return splitmix64(scenario_seed ^ fnv1a64(id));
}

std::uint64_t substream(std::uint64_t seed, std::string_view purpose) {
    return splitmix64(seed ^ fnv1a64(purpose));
}

// Mean-one lognormal factor.
double noise_factor(double sigma, double g) {
    return std::exp(sigma * g - 0.5 * sigma * sigma);
}

} // namespace

void ScenarioSpec::validate() const {
    if (name.empty()) throw ConfigError("scenario: empty name");
    if (metric.empty()) throw ConfigError("scenario: empty metric");
    if (campaigns <= 0) throw ConfigError("scenario: campaigns must be positive");
    if (!(stable_fraction >= 0.0 && stable_fraction <= 1.0))
        throw ConfigError("scenario: stable_fraction must be in [0, 1]");
    if (start_hour < 0 || start_hour % kSecondsPerHour != 0)
        throw ConfigError("scenario: start_hour must be a non-negative hour boundary");
    if (horizon_hours <= 0) throw ConfigError("scenario: horizon_hours must be positive");
    if (!(base_level > 0.0)) throw ConfigError("scenario: base_level must be positive");
    if (!(common_noise_sigma >= 0.0) || !std::isfinite(common_noise_sigma))
        throw ConfigError("scenario: common_noise_sigma must be finite and non-negative");
    for (const auto& inc : incidents) {
        if (inc.duration_hours <= 0)
            throw ConfigError("scenario: incident duration must be positive");
        if (!(inc.severity > 0.0 && inc.severity <= 1.0))
            throw ConfigError("scenario: incident severity must be in (0, 1]");
        if (inc.scope.empty()) throw ConfigError("scenario: incident scope is empty");
        if (inc.start % kSecondsPerHour != 0)
            throw ConfigError("scenario: incident start must be an hour boundary");
        if (inc.start < start_hour || inc.end() > end_hour())
            throw ConfigError("scenario: incident outside the simulated range");
    }
}

std::vector<SimCampaign> generate_portfolio(int n, double stable_fraction, std::uint64_t seed,
                                            Timestamp now, double base_level,
                                            int min_history_days) {
    if (n <= 0) throw Error("generate_portfolio: n must be positive");
    if (!(stable_fraction >= 0.0 && stable_fraction <= 1.0))
        throw Error("generate_portfolio: stable_fraction must be in [0, 1]");
    if (min_history_days < 8) throw Error("generate_portfolio: min_history_days too small");

    const int k_stable = static_cast<int>(std::llround(n * stable_fraction));
    const auto criteria = all_targeting_criteria();
    const auto channels = all_media_channels();

    int width = 3;
    for (int v = n; v >= 1000; v /= 10) ++width;

    std::vector<SimCampaign> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::ostringstream idbuf;
        idbuf << 'c';
        idbuf.width(width);
        idbuf.fill('0');
        idbuf << (i + 1);

        SimCampaign c;
        c.record.id = idbuf.str();
        c.record.currency = "USD";
        c.record.status = CampaignStatus::Active;
        c.record.start = hour_floor(now) - days(min_history_days + i % 30);
        c.record.channel = channels[static_cast<std::size_t>(i) % channels.size()];
        int n_targets = 1 + i % 3;
        for (int j = 0; j < n_targets; ++j)
            c.record.targeting.insert(criteria[static_cast<std::size_t>(i + j) % criteria.size()]);

        const std::uint64_t pseed = substream(campaign_seed(seed, c.record.id), "params");
        c.params.base = base_level * std::exp(0.5 * gaussian_at(pseed, 0));
        c.params.diurnal_amp = 0.35 + 0.10 * uniform_at(pseed, 1);
        c.params.diurnal_phase = 3.0 * (uniform_at(pseed, 2) - 0.5);
        for (int d = 0; d < 7; ++d)
            c.params.weekday[static_cast<std::size_t>(d)] =
                1.0 + 0.05 * std::sin(2.0 * std::numbers::pi * d / 7.0 +
                                      uniform_at(pseed, 3));
        c.params.noise_sigma = 0.04 + 0.02 * uniform_at(pseed, 4);

        if (i < k_stable) {
            c.behavior = Behavior::Seasonal;
            c.expect_stable = true;
            out.push_back(std::move(c));
            continue;
        }

        c.expect_stable = false;
        switch ((i - k_stable) % 8) {
            case 0: c.record.currency = "EUR"; break;
            case 1: c.record.status = CampaignStatus::Paused; break;
            case 2: c.record.status = CampaignStatus::Stopped; break;
            case 3: c.record.start = hour_floor(now) - days(3); break;
            case 4: c.record.end = hour_floor(now) - days(10); break;
            case 5:
                c.behavior = Behavior::HeavyNoise;
                c.params.noise_sigma = 1.2;
                break;
            case 6:
                c.behavior = Behavior::LevelWalk;
                c.params.diurnal_amp = 0.0;
                c.params.weekday.fill(1.0);
                c.params.walk_sigma = 0.05;
                c.params.noise_sigma = 0.4;
                break;
            case 7:
                c.behavior = Behavior::Flat;
                c.params.noise_sigma = 0.0;
                break;
        }
        out.push_back(std::move(c));
    }
    return out;
}

HourlySeries simulate_metric(const SimCampaign& c, Timestamp start_hour, int horizon_hours,
                             std::uint64_t seed, double common_noise_sigma) {
    if (start_hour % kSecondsPerHour != 0)
        throw Error("simulate_metric: start_hour must be an hour boundary");
    if (horizon_hours <= 0) throw Error("simulate_metric: horizon_hours must be positive");

    HourlySeries s;
    s.start_hour = start_hour;
    s.values.resize(static_cast<std::size_t>(horizon_hours));

    if (c.behavior == Behavior::Flat) {
        for (auto& v : s.values) v = c.params.base;
        return s;
    }

    const std::uint64_t cseed = campaign_seed(seed, c.record.id);
    const std::uint64_t wseed = substream(cseed, "walk");
    const std::uint64_t gseed = substream(seed, "__common__");

    double walk = 0.0;
    for (int i = 0; i < horizon_hours; ++i) {
        const Timestamp t = start_hour + hours(i);
        const auto abs_hour = static_cast<std::uint64_t>(t / kSecondsPerHour);
        const int hour_of_day = static_cast<int>(abs_hour % 24);
        const auto day_of_week = static_cast<std::size_t>((t / kSecondsPerDay) % 7);

        double v = c.params.base;
        v *= 1.0 + c.params.diurnal_amp *
                       std::sin(2.0 * std::numbers::pi * (hour_of_day - c.params.diurnal_phase) / 24.0);
        v *= c.params.weekday[day_of_week];
        if (c.params.walk_sigma > 0.0) {
            walk += c.params.walk_sigma * gaussian_at(wseed, static_cast<std::uint64_t>(i));
            v *= std::exp(walk);
        }
        v *= noise_factor(c.params.noise_sigma, gaussian_at(cseed, abs_hour));
        if (common_noise_sigma > 0.0)
            v *= noise_factor(common_noise_sigma, gaussian_at(gseed, abs_hour));
        s.values[static_cast<std::size_t>(i)] = v;
    }
    return s;
}

SimulatedData simulate(const ScenarioSpec& scenario) {
    scenario.validate();

    SimulatedData data;
    data.scenario = scenario;
    // Established campaigns must predate the window so their series cover it.
    const int history_days = std::max(8, scenario.horizon_hours / 24 + 2);
    data.campaigns = generate_portfolio(scenario.campaigns, scenario.stable_fraction,
                                        scenario.seed, scenario.end_hour(), scenario.base_level,
                                        history_days);
    for (const auto& c : data.campaigns) {
        HourlySeries s = simulate_metric(c, scenario.start_hour, scenario.horizon_hours,
                                         scenario.seed, scenario.common_noise_sigma);
        // No data outside the campaign's own lifetime.
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            Timestamp t = s.hour_at(i);
            if (t < c.record.start || (c.record.end && t >= *c.record.end))
                s.values[i] = std::nullopt;
        }
        s.trim_trailing_gaps();
        data.series[c.record.id] = std::move(s);
    }
    return data;
}

GroundTruth inject_incidents(SimulatedData& data, const std::vector<IncidentSpec>& specs) {
    GroundTruth truth;
    for (const auto& spec : specs) {
        if (spec.duration_hours <= 0) throw Error("inject_incidents: duration must be positive");
        if (!(spec.severity > 0.0 && spec.severity <= 1.0))
            throw Error("inject_incidents: severity must be in (0, 1]");
        if (spec.scope.empty()) throw Error("inject_incidents: empty scope");
        if (spec.start % kSecondsPerHour != 0)
            throw Error("inject_incidents: start must be an hour boundary");
        if (spec.start < data.scenario.start_hour || spec.end() > data.scenario.end_hour())
            throw Error("inject_incidents: incident outside the simulated range");

        const std::set<ClusterKey> scope(spec.scope.begin(), spec.scope.end());
        for (const auto& c : data.campaigns) {
            bool affected = false;
            for (const auto& key : clusters_of(c.record))
                if (scope.count(key)) { affected = true; break; }
            if (!affected) continue;

            HourlySeries& s = data.series.at(c.record.id);
            for (Timestamp h = spec.start; h < spec.end(); h += kSecondsPerHour) {
                auto idx = (h - s.start_hour) / kSecondsPerHour;
                if (idx < 0 || static_cast<std::size_t>(idx) >= s.values.size()) continue;
                auto& slot = s.values[static_cast<std::size_t>(idx)];
                if (slot) *slot *= 1.0 - spec.severity;
            }
        }
        for (const auto& key : spec.scope)
            for (Timestamp h = spec.start; h < spec.end(); h += kSecondsPerHour)
                truth.anomalous_hours[key].insert(h);
    }
    return truth;
}

ScenarioSpec parse_scenario(const std::string& text) {
    ScenarioSpec spec;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("scenario line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError("scenario line " + std::to_string(lineno) + ": empty key");

        try {
            if (key == "incident") {
                auto fields = detail::split(value, ' ');
                std::erase_if(fields, [](const std::string& f) { return f.empty(); });
                if (fields.size() != 5)
                    throw ConfigError(
                        "incident needs <offset_h> <duration_h> <severity> <kind> <scope>");
                IncidentSpec inc;
                inc.start = hours(detail::parse_int(fields[0], "incident offset"));
                inc.duration_hours = detail::parse_int(fields[1], "incident duration");
                inc.severity = detail::parse_double(fields[2], "incident severity");
                inc.kind = incident_kind_from_string(fields[3]);
                for (const auto& part : detail::split(fields[4], ','))
                    inc.scope.push_back(ClusterKey::from_string(part));
                spec.incidents.push_back(std::move(inc));
                continue;
            }

            if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
            if (key == "name") spec.name = value;
            else if (key == "metric") spec.metric = value;
            else if (key == "campaigns") spec.campaigns = detail::parse_int(value, key);
            else if (key == "stable_fraction") spec.stable_fraction = detail::parse_double(value, key);
            else if (key == "start_hour") spec.start_hour = detail::parse_i64(value, key);
            else if (key == "horizon_hours") spec.horizon_hours = detail::parse_int(value, key);
            else if (key == "seed") spec.seed = detail::parse_u64(value, key);
            else if (key == "base_level") spec.base_level = detail::parse_double(value, key);
            else if (key == "common_noise_sigma") spec.common_noise_sigma = detail::parse_double(value, key);
            else throw ConfigError("unknown key '" + key + "'");
        } catch (const Error& e) {
            throw ConfigError("scenario line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    // Incident offsets are relative to start_hour, which may appear later in
    // the file; resolve them once everything is read.
    for (auto& inc : spec.incidents) inc.start += spec.start_hour;
    spec.validate();
    return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario", path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

void write_truth_csv(const std::string& path, const GroundTruth& truth) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    out << "cluster,hour\n";
    for (const auto& [key, hours] : truth.anomalous_hours)
        for (Timestamp h : hours) out << key.to_string() << ',' << h << '\n';
    if (!out) throw IoError("write failed", path);
}

GroundTruth read_truth_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open", path);
    GroundTruth truth;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) { header = false; continue; }
        if (line.empty()) continue;
        auto fields = detail::split(line, ',');
        if (fields.size() != 2) throw IoError("bad truth row: '" + line + "'", path);
        truth.anomalous_hours[ClusterKey::from_string(fields[0])].insert(
            detail::parse_i64(fields[1], "truth hour"));
    }
    return truth;
}

void write_incidents_csv(const std::string& path, const std::vector<IncidentSpec>& incidents) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    out << "start,duration_hours,severity,kind,scope\n";
    for (const auto& inc : incidents) {
        out << inc.start << ',' << inc.duration_hours << ',' << format_value(inc.severity) << ','
            << to_string(inc.kind) << ',';
        for (std::size_t i = 0; i < inc.scope.size(); ++i) {
            if (i) out << '|';
            out << inc.scope[i].to_string();
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed", path);
}

std::vector<IncidentSpec> read_incidents_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open", path);
    std::vector<IncidentSpec> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) { header = false; continue; }
        if (line.empty()) continue;
        auto fields = detail::split(line, ',');
        if (fields.size() != 5) throw IoError("bad incident row: '" + line + "'", path);
        IncidentSpec inc;
        inc.start = detail::parse_i64(fields[0], "incident start");
        inc.duration_hours = detail::parse_int(fields[1], "incident duration");
        inc.severity = detail::parse_double(fields[2], "incident severity");
        inc.kind = incident_kind_from_string(fields[3]);
        for (const auto& part : detail::split(fields[4], '|'))
            inc.scope.push_back(ClusterKey::from_string(part));
        out.push_back(std::move(inc));
    }
    return out;
}

void write_sim_labels_csv(const std::string& path, const std::vector<SimCampaign>& campaigns) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    out << "id,behavior,expect_stable\n";
    for (const auto& c : campaigns)
        out << c.record.id << ',' << to_string(c.behavior) << ',' << (c.expect_stable ? 1 : 0)
            << '\n';
    if (!out) throw IoError("write failed", path);
}

std::map<std::string, bool> read_sim_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open", path);
    std::map<std::string, bool> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) { header = false; continue; }
        if (line.empty()) continue;
        auto fields = detail::split(line, ',');
        if (fields.size() != 3) throw IoError("bad sim label row: '" + line + "'", path);
        out[fields[0]] = fields[2] == "1";
    }
    return out;
}

} // namespace campmon

#include "campmon/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "campmon/tsdb.hpp"
#include "util.hpp"

namespace campmon {

Confusion confusion(const std::vector<StepRecord>& labels, const std::set<Timestamp>& truth,
                    int tolerance_hours) {
    if (tolerance_hours < 0) throw Error("confusion: negative tolerance");

    std::set<Timestamp> labeled;
    std::set<Timestamp> flagged;
    for (const auto& rec : labels) {
        labeled.insert(rec.hour);
        if (rec.label == Label::Anomaly) flagged.insert(rec.hour);
    }
    for (Timestamp t : truth)
        if (!labeled.count(t))
            throw Error("confusion: hour mismatch, truth hour " + std::to_string(t) +
                        " is not among the labeled hours");

    const Timestamp tol = hours(tolerance_hours);
    auto any_in = [tol](const std::set<Timestamp>& s, Timestamp t) {
        auto it = s.lower_bound(t - tol);
        return it != s.end() && *it <= t + tol;
    };

    Confusion c;
    for (Timestamp t : truth)
        any_in(flagged, t) ? ++c.tp : ++c.fn;
    for (Timestamp a : flagged)
        if (!any_in(truth, a)) ++c.fp;
    return c;
}

double precision_of(const Confusion& c) {
    long denom = c.tp + c.fp;
    return denom == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

double recall_of(const Confusion& c) {
    long denom = c.tp + c.fn;
    return denom == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

double f1(double precision, double recall) {
    double sum = precision + recall;
    return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

EvalReport evaluate(const std::vector<StepRecord>& labels, const std::set<Timestamp>& truth,
                    const std::vector<IncidentSpec>& incidents, const std::string& config_hash,
                    int tolerance_hours) {
    if (labels.empty()) throw Error("evaluate: no labels");

    Timestamp lo = labels.front().hour;
    Timestamp hi = labels.back().hour;
    for (const auto& rec : labels) {
        lo = std::min(lo, rec.hour);
        hi = std::max(hi, rec.hour);
    }

    EvalReport r;
    r.config_hash = config_hash;

    std::set<Timestamp> clipped;
    for (Timestamp t : truth) {
        if (t < lo || t > hi)
            ++r.truth_hours_clipped;
        else
            clipped.insert(t);
    }

    r.counts = confusion(labels, clipped, tolerance_hours);
    r.precision = precision_of(r.counts);
    r.recall = recall_of(r.counts);
    r.f1 = f1(r.precision, r.recall);

    std::set<Timestamp> flagged;
    for (const auto& rec : labels)
        if (rec.label == Label::Anomaly) flagged.insert(rec.hour);

    for (const auto& inc : incidents) {
        IncidentLatency lat;
        lat.incident = inc;
        auto it = flagged.lower_bound(inc.start);
        if (it != flagged.end() && *it < inc.end())
            lat.hours = static_cast<int>((*it - inc.start) / kSecondsPerHour);
        r.latencies.push_back(std::move(lat));
    }
    return r;
}

namespace {

std::string scope_string(const IncidentSpec& inc) {
    std::string s;
    for (std::size_t i = 0; i < inc.scope.size(); ++i) {
        if (i) s += '|';
        s += inc.scope[i].to_string();
    }
    return s;
}

} // namespace

void write_eval_report_text(const std::string& path, const EvalReport& r) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    out << std::fixed << std::setprecision(6);
    out << "config:    " << r.config_hash << '\n';
    out << "tp/fp/fn:  " << r.counts.tp << '/' << r.counts.fp << '/' << r.counts.fn << '\n';
    out << "precision: " << r.precision << '\n';
    out << "recall:    " << r.recall << '\n';
    out << "f1:        " << r.f1 << '\n';
    out << "clipped truth hours: " << r.truth_hours_clipped << '\n';
    if (!r.latencies.empty()) out << "incidents:\n";
    for (const auto& lat : r.latencies) {
        out << "  start=" << lat.incident.start << " kind=" << to_string(lat.incident.kind)
            << " duration=" << lat.incident.duration_hours << "h scope=" << scope_string(lat.incident)
            << " latency=";
        if (lat.hours)
            out << *lat.hours << 'h';
        else
            out << "missed";
        out << '\n';
    }
    if (!out) throw IoError("write failed", path);
}

void write_eval_report_csv(const std::string& path, const EvalReport& r) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    out << "key,value\n";
    out << "tp," << r.counts.tp << '\n';
    out << "fp," << r.counts.fp << '\n';
    out << "fn," << r.counts.fn << '\n';
    out << "precision," << format_value(r.precision) << '\n';
    out << "recall," << format_value(r.recall) << '\n';
    out << "f1," << format_value(r.f1) << '\n';
    out << "config," << r.config_hash << '\n';
    out << "clipped," << r.truth_hours_clipped << '\n';
    for (const auto& lat : r.latencies) {
        out << "latency," << lat.incident.start << ' ' << lat.incident.duration_hours << ' '
            << format_value(lat.incident.severity) << ' ' << to_string(lat.incident.kind) << ' '
            << scope_string(lat.incident) << ' ';
        if (lat.hours)
            out << *lat.hours;
        else
            out << "missed";
        out << '\n';
    }
    if (!out) throw IoError("write failed", path);
}

EvalReport read_eval_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open", path);
    EvalReport r;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) { header = false; continue; }
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos) throw IoError("bad report row: '" + line + "'", path);
        std::string key = line.substr(0, comma);
        std::string value = line.substr(comma + 1);
        if (key == "tp") r.counts.tp = detail::parse_i64(value, key);
        else if (key == "fp") r.counts.fp = detail::parse_i64(value, key);
        else if (key == "fn") r.counts.fn = detail::parse_i64(value, key);
        else if (key == "precision") r.precision = detail::parse_double(value, key);
        else if (key == "recall") r.recall = detail::parse_double(value, key);
        else if (key == "f1") r.f1 = detail::parse_double(value, key);
        else if (key == "config") r.config_hash = value;
        else if (key == "clipped") r.truth_hours_clipped = detail::parse_i64(value, key);
        else if (key == "latency") {
            auto fields = detail::split(value, ' ');
            if (fields.size() != 6) throw IoError("bad latency row: '" + line + "'", path);
            IncidentLatency lat;
            lat.incident.start = detail::parse_i64(fields[0], "latency start");
            lat.incident.duration_hours = detail::parse_int(fields[1], "latency duration");
            lat.incident.severity = detail::parse_double(fields[2], "latency severity");
            lat.incident.kind = incident_kind_from_string(fields[3]);
            for (const auto& part : detail::split(fields[4], '|'))
                lat.incident.scope.push_back(ClusterKey::from_string(part));
            if (fields[5] != "missed") lat.hours = detail::parse_int(fields[5], "latency hours");
            r.latencies.push_back(std::move(lat));
        } else {
            throw IoError("unknown report key: '" + key + "'", path);
        }
    }
    return r;
}

double median(std::vector<double> v) {
    if (v.empty()) throw Error("median: empty input");
    std::sort(v.begin(), v.end());
    std::size_t mid = v.size() / 2;
    if (v.size() % 2 == 1) return v[mid];
    return 0.5 * (v[mid - 1] + v[mid]);
}

double mad(const std::vector<double>& v) {
    double m = median(v);
    std::vector<double> dev;
    dev.reserve(v.size());
    for (double x : v) dev.push_back(std::abs(x - m));
    return median(std::move(dev));
}

std::vector<StabilityRow> stability_report(const std::map<int, ChangeMetric>& all_campaigns,
                                           const std::map<int, ChangeMetric>& stable_only,
                                           const std::set<Timestamp>& incident_hours) {
    auto collect = [&incident_hours](const ChangeMetric& cm) {
        std::vector<double> out;
        for (std::size_t i = 0; i < cm.series.values.size(); ++i) {
            const auto& v = cm.series.values[i];
            if (v && !incident_hours.count(cm.series.hour_at(i))) out.push_back(*v);
        }
        return out;
    };

    std::vector<StabilityRow> rows;
    for (const auto& [p, cm_all] : all_campaigns) {
        auto it = stable_only.find(p);
        if (it == stable_only.end())
            throw Error("stability_report: missing stable metric for p=" + std::to_string(p));

        StabilityRow row;
        row.p = p;
        row.mad_all = mad(collect(cm_all));
        row.mad_stable = mad(collect(it->second));
        if (row.mad_all > 0.0)
            row.ratio = row.mad_stable / row.mad_all;
        else
            row.ratio = row.mad_stable == 0.0 ? 1.0
                                              : std::numeric_limits<double>::infinity();
        rows.push_back(row);
    }
    return rows;
}

} // namespace campmon

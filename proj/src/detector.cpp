#include "campmon/detector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "campmon/aggregation.hpp"
#include "campmon/errors.hpp"
#include "campmon/tsdb.hpp"

namespace campmon {

std::string to_string(Label l) {
    switch (l) {
        case Label::Normal: return "normal";
        case Label::Anomaly: return "anomaly";
        case Label::PositiveOutlier: return "positive_outlier";
    }
    return "?";
}

Label label_from_string(const std::string& s) {
    if (s == "normal") return Label::Normal;
    if (s == "anomaly") return Label::Anomaly;
    if (s == "positive_outlier") return Label::PositiveOutlier;
    throw Error("unknown label: " + s);
}

double shrink_beta(std::span<const Label> window, double beta_max) {
    if (window.empty()) throw Error("shrink_beta: empty window");
    long abnormal = std::count(window.begin(), window.end(), Label::Anomaly);
    long normal = static_cast<long>(window.size()) - abnormal;
    return beta_max * static_cast<double>(normal) / static_cast<double>(window.size());
}

DetectorState DetectorState::init(std::span<const double> training, const DetectorConfig& cfg) {
    if (training.empty()) throw Error("insufficient training data");
    DetectorState s;
    s.cfg_ = cfg;
    s.beta_ = cfg.beta_max;
    for (double d : training) s.absorb(d);
    return s;
}

void DetectorState::absorb(double d) {
    sum_ = cfg_.alpha * sum_ + d;
    sum_sq_ = cfg_.alpha * sum_sq_ + d * d;
    count_ = cfg_.alpha * count_ + 1.0;
}

double DetectorState::sigma() const {
    double mu = mean();
    double var = sum_sq_ / count_ - mu * mu;
    return std::sqrt(std::max(var, 0.0));
}

double DetectorState::effective_sigma() const {
    return std::max(sigma(), cfg_.sigma_floor);
}

Label DetectorState::classify(double d, double mu, double sigma_eff, double beta,
                              NegativeMode mode) {
    if (std::abs(d - mu) > beta * sigma_eff) {
        bool negative = mode == NegativeMode::BelowMean ? d < mu : d < 0.0;
        return negative ? Label::Anomaly : Label::PositiveOutlier;
    }
    return Label::Normal;
}

void DetectorState::push_label(Label window_entry) {
    window_.push_back(window_entry);
    while (window_.size() > static_cast<std::size_t>(cfg_.shrink_window))
        window_.erase(window_.begin());
}

Label DetectorState::step(double d) {
    Label label = classify(d, mean(), effective_sigma(), beta_, cfg_.negative_mode);
    if (label == Label::Normal) absorb(d);
    // Positive outliers enter the window as normal points.
    push_label(label == Label::Anomaly ? Label::Anomaly : Label::Normal);
    if (cfg_.beta_policy == BetaPolicy::PerStep || label == Label::Anomaly) {
        beta_ = shrink_beta(window_, cfg_.beta_max);
    }
    return label;
}

std::vector<StepRecord> detect_series(const ChangeMetric& d, const DetectorConfig& cfg,
                                      int training_len) {
    if (training_len <= 0) throw Error("training_len must be positive");

    std::vector<std::pair<Timestamp, double>> present;
    present.reserve(d.series.size());
    for (std::size_t i = 0; i < d.series.size(); ++i) {
        if (d.series.values[i]) present.emplace_back(d.series.hour_at(i), *d.series.values[i]);
    }
    if (present.size() < static_cast<std::size_t>(training_len))
        throw Error("insufficient training data: " + std::to_string(present.size()) +
                    " present points, need " + std::to_string(training_len));

    std::vector<double> training;
    training.reserve(static_cast<std::size_t>(training_len));
    for (int i = 0; i < training_len; ++i) training.push_back(present[static_cast<std::size_t>(i)].second);
    DetectorState state = DetectorState::init(training, cfg);

    std::vector<StepRecord> out;
    out.reserve(present.size() - training.size());
    for (std::size_t i = training.size(); i < present.size(); ++i) {
        StepRecord rec;
        rec.hour = present[i].first;
        rec.value = present[i].second;
        rec.mu = state.mean();
        rec.sigma = state.effective_sigma();
        rec.beta = state.beta();
        rec.label = state.step(rec.value);
        out.push_back(rec);
    }
    return out;
}

void write_labels_csv(const std::string& path, const std::vector<StepRecord>& records,
                      const std::vector<std::pair<std::string, std::string>>& meta) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
    out << "hour,value,mu,sigma,beta,label\n";
    for (const auto& r : records) {
        out << r.hour << ',' << format_value(r.value) << ',' << format_value(r.mu) << ','
            << format_value(r.sigma) << ',' << format_value(r.beta) << ',' << to_string(r.label)
            << '\n';
    }
    if (!out) throw IoError("write failed", path);
}

namespace {

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(',', pos);
        if (next == std::string::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

double parse_double_field(const std::string& s, const std::string& path) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw Error(path + ": bad numeric field '" + s + "'");
    return v;
}

} // namespace

std::vector<StepRecord> read_labels_csv(const std::string& path,
                                        std::vector<std::pair<std::string, std::string>>* meta) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open", path);
    std::vector<StepRecord> out;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (meta) {
                std::string body = line.substr(line.find_first_not_of("# "));
                std::size_t eq = body.find('=');
                if (eq != std::string::npos)
                    meta->emplace_back(body.substr(0, eq), body.substr(eq + 1));
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        auto cols = split_commas(line);
        if (cols.size() != 6) throw Error(path + ": bad label row: " + line);
        StepRecord r;
        {
            auto [p, ec] = std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), r.hour);
            if (ec != std::errc{} || p != cols[0].data() + cols[0].size())
                throw Error(path + ": bad hour field '" + cols[0] + "'");
        }
        r.value = parse_double_field(cols[1], path);
        r.mu = parse_double_field(cols[2], path);
        r.sigma = parse_double_field(cols[3], path);
        r.beta = parse_double_field(cols[4], path);
        r.label = label_from_string(cols[5]);
        out.push_back(r);
    }
    return out;
}

void write_bounds_csv(const std::string& path, const std::vector<StepRecord>& records) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    out << "hour,lower,upper\n";
    for (const auto& r : records) {
        out << r.hour << ',' << format_value(r.mu - r.beta * r.sigma) << ','
            << format_value(r.mu + r.beta * r.sigma) << '\n';
    }
    if (!out) throw IoError("write failed", path);
}

} // namespace campmon

#include "campmon/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "campmon/errors.hpp"
#include "campmon/hash.hpp"
#include "campmon/tsdb.hpp"

namespace campmon {

std::string to_string(BetaPolicy p) {
    return p == BetaPolicy::PerStep ? "per_step" : "on_anomaly";
}

std::string to_string(NegativeMode m) {
    return m == NegativeMode::BelowMean ? "below_mean" : "below_zero";
}

BetaPolicy beta_policy_from_string(const std::string& s) {
    if (s == "per_step") return BetaPolicy::PerStep;
    if (s == "on_anomaly") return BetaPolicy::OnAnomaly;
    throw ConfigError("unknown beta_policy: " + s);
}

NegativeMode negative_mode_from_string(const std::string& s) {
    if (s == "below_mean") return NegativeMode::BelowMean;
    if (s == "below_zero") return NegativeMode::BelowZero;
    throw ConfigError("unknown negative_mode: " + s);
}

void PipelineConfig::validate() const {
    if (l <= 0) throw ConfigError("l must be positive");
    if (p_values.empty()) throw ConfigError("p_values must not be empty");
    for (int p : p_values)
        if (p <= 0) throw ConfigError("every p must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0,1)");
    if (x < 0) throw ConfigError("x must be non-negative");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0,1]");
    if (!(beta_max > 0.0) || !std::isfinite(beta_max))
        throw ConfigError("beta_max must be positive and finite");
    if (shrink_window <= 0) throw ConfigError("shrink_window must be positive");
    if (training_len <= 0) throw ConfigError("training_len must be positive");
    if (min_duration_days < 0) throw ConfigError("min_duration_days must be non-negative");
    if (!(sigma_floor >= 0.0) || !std::isfinite(sigma_floor))
        throw ConfigError("sigma_floor must be non-negative and finite");
    if (eval_tolerance_hours < 0) throw ConfigError("eval_tolerance_hours must be non-negative");
}

int PipelineConfig::max_p() const {
    return *std::max_element(p_values.begin(), p_values.end());
}

int PipelineConfig::detect_p() const {
    if (std::find(p_values.begin(), p_values.end(), 7) != p_values.end()) return 7;
    return max_p();
}

DetectorConfig PipelineConfig::detector() const {
    DetectorConfig d;
    d.alpha = alpha;
    d.beta_max = beta_max;
    d.shrink_window = shrink_window;
    d.sigma_floor = sigma_floor;
    d.beta_policy = beta_policy;
    d.negative_mode = negative_mode;
    return d;
}

std::string PipelineConfig::canonical() const {
    std::ostringstream out;
    out << "l=" << l << '\n';
    out << "p_values=";
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        if (i) out << ',';
        out << p_values[i];
    }
    out << '\n';
    out << "delta=" << format_value(delta) << '\n';
    out << "x=" << x << '\n';
    out << "alpha=" << format_value(alpha) << '\n';
    out << "beta_max=" << format_value(beta_max) << '\n';
    out << "shrink_window=" << shrink_window << '\n';
    out << "training_len=" << training_len << '\n';
    out << "min_duration_days=" << min_duration_days << '\n';
    out << "sigma_floor=" << format_value(sigma_floor) << '\n';
    out << "beta_policy=" << to_string(beta_policy) << '\n';
    out << "negative_mode=" << to_string(negative_mode) << '\n';
    out << "eval_tolerance_hours=" << eval_tolerance_hours << '\n';
    return out.str();
}

std::string PipelineConfig::hash() const {
    return hex64(fnv1a64(canonical()));
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int to_int(const std::string& v, const std::string& key) {
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("bad integer for " + key + ": '" + v + "'");
    return out;
}

double to_double(const std::string& v, const std::string& key) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("bad number for " + key + ": '" + v + "'");
    return out;
}

std::vector<int> to_int_list(const std::string& v, const std::string& key) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        std::size_t next = v.find(',', pos);
        std::string item = trim(next == std::string::npos ? v.substr(pos)
                                                          : v.substr(pos, next - pos));
        if (item.empty()) throw ConfigError("empty entry in " + key);
        out.push_back(to_int(item, key));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

} // namespace

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (!seen.insert(key).second)
            throw ConfigError("duplicate config key: " + key);

        if (key == "l") cfg.l = to_int(value, key);
        else if (key == "p_values") cfg.p_values = to_int_list(value, key);
        else if (key == "delta") cfg.delta = to_double(value, key);
        else if (key == "x") cfg.x = to_int(value, key);
        else if (key == "alpha") cfg.alpha = to_double(value, key);
        else if (key == "beta_max") cfg.beta_max = to_double(value, key);
        else if (key == "shrink_window") cfg.shrink_window = to_int(value, key);
        else if (key == "training_len") cfg.training_len = to_int(value, key);
        else if (key == "min_duration_days") cfg.min_duration_days = to_int(value, key);
        else if (key == "sigma_floor") cfg.sigma_floor = to_double(value, key);
        else if (key == "beta_policy") cfg.beta_policy = beta_policy_from_string(value);
        else if (key == "negative_mode") cfg.negative_mode = negative_mode_from_string(value);
        else if (key == "eval_tolerance_hours") cfg.eval_tolerance_hours = to_int(value, key);
        else throw ConfigError("unknown config key: " + key);
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config", path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void write_config(const std::string& path, const PipelineConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    out << cfg.canonical();
    if (!out) throw IoError("write failed", path);
}

} // namespace campmon

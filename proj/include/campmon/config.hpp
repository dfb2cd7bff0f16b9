#pragma once

#include <string>
#include <vector>

#include "campmon/detector.hpp"

namespace campmon {

// Tunables for the whole pipeline. Defaults are the values every report
// records; the file format is flat `key = value` lines with these field
// names, unknown keys rejected.
struct PipelineConfig {
    int l = 24;                      // window length in hours
    std::vector<int> p_values{1, 7}; // seasonality periods in days
    double delta = 0.8;              // correlation threshold, in (0,1)
    int x = 2;                       // freshness delay in hours
    double alpha = 0.99;             // detector decay factor, in [0,1]
    double beta_max = 3.0;
    int shrink_window = 168;         // label window length in points
    int training_len = 168;          // detector training points
    int min_duration_days = 7;
    double sigma_floor = 1e-12;
    BetaPolicy beta_policy = BetaPolicy::PerStep;
    NegativeMode negative_mode = NegativeMode::BelowMean;
    int eval_tolerance_hours = 0;    // +/- matching window for scoring

    // Throws ConfigError when any value is outside its range.
    void validate() const;

    int max_p() const;
    // Period the detector consumes: 7 when configured, else the largest.
    int detect_p() const;

    DetectorConfig detector() const;

    // Fixed-order `key=value` dump; the config hash is FNV-1a over it.
    std::string canonical() const;
    std::string hash() const;
};

std::string to_string(BetaPolicy p);
std::string to_string(NegativeMode m);
BetaPolicy beta_policy_from_string(const std::string& s);
NegativeMode negative_mode_from_string(const std::string& s);

PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::string& path);
void write_config(const std::string& path, const PipelineConfig& cfg);

} // namespace campmon

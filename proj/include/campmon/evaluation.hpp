#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "campmon/aggregation.hpp"
#include "campmon/detector.hpp"
#include "campmon/simulator.hpp"

namespace campmon {

struct Confusion {
    long tp = 0;
    long fp = 0;
    long fn = 0;
};

// Per-point matching on exact hours (PositiveOutlier counts as not
// anomalous). With tolerance_hours > 0 a truth hour is hit by an Anomaly
// label within +/- that many hours. Every truth hour must be among the
// labeled hours; otherwise throws Error ("hour mismatch").
Confusion confusion(const std::vector<StepRecord>& labels, const std::set<Timestamp>& truth,
                    int tolerance_hours = 0);

// TP/(TP+FP) and TP/(TP+FN); 0 when the denominator is 0.
double precision_of(const Confusion& c);
double recall_of(const Confusion& c);

// 2 * p * r / (p + r); 0 when both are 0.
double f1(double precision, double recall);

struct IncidentLatency {
    IncidentSpec incident;
    std::optional<int> hours;  // onset to first Anomaly label, absent if missed
};

struct EvalReport {
    Confusion counts;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::string config_hash;
    std::vector<IncidentLatency> latencies;
    long truth_hours_clipped = 0;  // truth rows outside the labeled span
};

EvalReport evaluate(const std::vector<StepRecord>& labels, const std::set<Timestamp>& truth,
                    const std::vector<IncidentSpec>& incidents, const std::string& config_hash,
                    int tolerance_hours = 0);

void write_eval_report_text(const std::string& path, const EvalReport& r);
void write_eval_report_csv(const std::string& path, const EvalReport& r);
EvalReport read_eval_report_csv(const std::string& path);

double median(std::vector<double> v);
// Median absolute deviation from the median.
double mad(const std::vector<double>& v);

struct StabilityRow {
    int p = 0;
    double mad_all = 0.0;
    double mad_stable = 0.0;
    double ratio = 0.0;  // stable / all
};

// Robust dispersion of each change metric outside incident hours, per p.
// Inputs are keyed by p and must cover the same horizon.
std::vector<StabilityRow> stability_report(const std::map<int, ChangeMetric>& all_campaigns,
                                           const std::map<int, ChangeMetric>& stable_only,
                                           const std::set<Timestamp>& incident_hours);

} // namespace campmon

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "campmon/config.hpp"
#include "campmon/evaluation.hpp"
#include "campmon/simulator.hpp"
#include "campmon/stability.hpp"

namespace campmon {

// What a stage produced: enough to rerun it and to check reproducibility.
struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string scenario_path;
    std::string output_dir;
    std::vector<std::string> outputs;                 // relative to output_dir
    std::vector<std::pair<std::string, double>> timings_ms;
    std::vector<std::pair<std::string, std::string>> notes;

    void add_output(const std::string& rel_path) { outputs.push_back(rel_path); }
    void write(const std::string& path) const;  // JSON
};

struct SimulateResult {
    RunManifest manifest;
    int put_lines = 0;
};

// scenario -> put-line store under <out>/series plus portfolio.csv,
// sim_labels.csv, truth.csv, incidents.csv and manifest.json.
SimulateResult run_simulate(const std::string& scenario_path,
                            std::optional<std::uint64_t> seed_override,
                            const std::string& out_dir);

struct DetectResult {
    RunManifest manifest;
    StableSet stable;
    // Steps of every cluster the detector ran on (keyed by cluster).
    std::map<ClusterKey, std::vector<StepRecord>> labels;
    long anomaly_count = 0;
};

// data dir (store + portfolio.csv) -> stable_set.txt, per-cluster change
// metric CSVs for every configured p, and labels/bounds CSVs for the
// detection period.
DetectResult run_detect(const std::string& data_dir, const PipelineConfig& cfg,
                        const std::string& out_dir);

struct EvalResult {
    RunManifest manifest;
    EvalReport report;
    ClusterKey cluster;
};

// One labels CSV against the truth file; the cluster is read from the
// labels header unless given. Incident latencies are reported when an
// incidents.csv sits next to the truth file.
EvalResult run_eval(const std::string& labels_path, const std::string& truth_path,
                    const std::optional<std::string>& cluster_name,
                    const PipelineConfig& cfg, const std::string& out_dir);

// data dir -> aggregated hourly and change-metric CSVs per cluster, both
// all-campaign and stable-only variants (plotting data).
RunManifest run_export(const std::string& data_dir, const PipelineConfig& cfg,
                       const std::string& out_dir);

struct ReportResult {
    RunManifest manifest;
    // cluster -> per-p dispersion comparison
    std::map<ClusterKey, std::vector<StabilityRow>> rows;
};

// data dir -> stable-vs-all dispersion comparison per cluster and p.
ReportResult run_report(const std::string& data_dir, const PipelineConfig& cfg,
                        const std::string& out_dir);

// Reads every campaign series from <data_dir>/series for the store's
// single metric, downsampled hourly.
struct LoadedData {
    std::vector<CampaignRecord> portfolio;
    std::map<std::string, HourlySeries> series_by_id;
    std::string metric;
    Timestamp data_end = 0;  // one hour past the last sample
};
LoadedData load_data_dir(const std::string& data_dir);

} // namespace campmon

#include "campmon/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "campmon/stability.hpp"
#include "campmon/tsdb.hpp"

namespace fs = std::filesystem;

namespace campmon {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory", dir);
}

std::string join(const std::string& dir, const std::string& rel) {
    return (fs::path(dir) / rel).string();
}

void note_warnings(RunManifest& m, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) m.notes.emplace_back("warning", w);
}

} // namespace

void RunManifest::write(const std::string& path) const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["scenario"] = scenario_path;
    j["output_dir"] = output_dir;
    j["outputs"] = outputs;
    auto& t = j["timings_ms"] = nlohmann::ordered_json::object();
    for (const auto& [name, ms] : timings_ms) t[name] = ms;
    auto& n = j["notes"] = nlohmann::ordered_json::array();
    for (const auto& [key, value] : notes) n.push_back({{"key", key}, {"value", value}});

    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing", path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed", path);
}

SimulateResult run_simulate(const std::string& scenario_path,
                            std::optional<std::uint64_t> seed_override,
                            const std::string& out_dir) {
    ensure_dir(out_dir);

    ScenarioSpec spec = load_scenario(scenario_path);
    if (seed_override) spec.seed = *seed_override;

    SimulateResult res;
    res.manifest.command = "simulate";
    res.manifest.seed = spec.seed;
    res.manifest.scenario_path = scenario_path;
    res.manifest.output_dir = out_dir;

    auto t0 = Clock::now();
    SimulatedData data = simulate(spec);
    GroundTruth truth = inject_incidents(data, spec.incidents);
    res.manifest.timings_ms.emplace_back("simulate", ms_since(t0));

    t0 = Clock::now();
    SeriesStore store(join(out_dir, "series"));
    for (const auto& c : data.campaigns) {
        const HourlySeries& s = data.series.at(c.record.id);
        PutLine p;
        p.metric = spec.metric;
        p.tags = {{"campaign", c.record.id}};
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            if (!s.values[i]) continue;
            p.timestamp = s.hour_at(i);
            p.value = *s.values[i];
            store.append(p);
            ++res.put_lines;
        }
    }
    store.flush();
    res.manifest.timings_ms.emplace_back("write_store", ms_since(t0));
    res.manifest.add_output("series");

    std::vector<CampaignRecord> records;
    records.reserve(data.campaigns.size());
    for (const auto& c : data.campaigns) records.push_back(c.record);
    write_portfolio_csv(join(out_dir, "portfolio.csv"), records);
    res.manifest.add_output("portfolio.csv");

    write_sim_labels_csv(join(out_dir, "sim_labels.csv"), data.campaigns);
    res.manifest.add_output("sim_labels.csv");

    write_truth_csv(join(out_dir, "truth.csv"), truth);
    res.manifest.add_output("truth.csv");

    write_incidents_csv(join(out_dir, "incidents.csv"), spec.incidents);
    res.manifest.add_output("incidents.csv");

    res.manifest.notes.emplace_back("scenario_name", spec.name);
    res.manifest.notes.emplace_back("metric", spec.metric);
    res.manifest.notes.emplace_back("campaigns", std::to_string(spec.campaigns));
    res.manifest.notes.emplace_back("horizon_hours", std::to_string(spec.horizon_hours));
    res.manifest.notes.emplace_back("put_lines", std::to_string(res.put_lines));

    res.manifest.add_output("manifest.json");
    res.manifest.write(join(out_dir, "manifest.json"));
    return res;
}

LoadedData load_data_dir(const std::string& data_dir) {
    LoadedData loaded;
    loaded.portfolio = read_portfolio_csv(join(data_dir, "portfolio.csv"));

    SeriesStore store(join(data_dir, "series"));
    auto keys = store.list_keys();
    if (keys.empty()) throw IoError("no series found under data directory", data_dir);

    loaded.metric = keys.front().metric;
    for (const auto& key : keys) {
        if (key.metric != loaded.metric)
            throw Error("store holds multiple metrics: '" + loaded.metric + "' and '" +
                        key.metric + "'");
        auto it = key.tags.find("campaign");
        if (it == key.tags.end())
            throw Error("series key without campaign tag: " + key.metric);
        RawSeries raw = store.read(key.metric, key.tags);
        HourlySeries hourly = downsample_hourly(raw);
        if (!hourly.empty())
            loaded.data_end = std::max(loaded.data_end, hourly.end_hour() + kSecondsPerHour);
        loaded.series_by_id[it->second] = std::move(hourly);
    }
    if (loaded.data_end == 0) throw Error("every stored series is empty");
    return loaded;
}

DetectResult run_detect(const std::string& data_dir, const PipelineConfig& cfg,
                        const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);

    DetectResult res;
    res.manifest.command = "detect";
    res.manifest.config_hash = cfg.hash();
    res.manifest.output_dir = out_dir;

    auto t0 = Clock::now();
    LoadedData loaded = load_data_dir(data_dir);
    res.manifest.timings_ms.emplace_back("load", ms_since(t0));

    const Timestamp now = loaded.data_end;
    std::vector<std::string> warnings;

    t0 = Clock::now();
    res.stable = refresh_stable_set(loaded.portfolio, loaded.series_by_id, now, cfg, &warnings);
    res.manifest.timings_ms.emplace_back("stable_set", ms_since(t0));

    write_stable_set(join(out_dir, "stable_set.txt"), res.stable);
    res.manifest.add_output("stable_set.txt");
    write_config(join(out_dir, "config.cfg"), cfg);
    res.manifest.add_output("config.cfg");

    t0 = Clock::now();
    const int detect_p = cfg.detect_p();
    int clusters_detected = 0;
    for (const auto& key : all_cluster_keys()) {
        HourlySeries agg =
            aggregate_cluster(res.stable, key, loaded.portfolio, loaded.series_by_id, &warnings);
        if (agg.empty()) continue;

        ChangeMetric for_detect;
        for (int p : cfg.p_values) {
            ChangeMetric cm = change_metric(agg, p, key, &warnings);
            std::string rel = "change_" + key.file_stem() + "_p" + std::to_string(p) + ".csv";
            write_change_metric_csv(join(out_dir, rel), cm);
            res.manifest.add_output(rel);
            if (p == detect_p) for_detect = std::move(cm);
        }

        std::vector<StepRecord> records;
        try {
            records = detect_series(for_detect, cfg.detector(), cfg.training_len);
        } catch (const Error& e) {
            warnings.push_back("cluster " + key.to_string() + ": " + e.what());
            continue;
        }

        std::vector<std::pair<std::string, std::string>> meta{
            {"cluster", key.to_string()},
            {"p", std::to_string(detect_p)},
            {"config", cfg.hash()},
            {"training_len", std::to_string(cfg.training_len)},
            {"computed_at", std::to_string(now)},
        };
        std::string labels_rel = "labels_" + key.file_stem() + ".csv";
        write_labels_csv(join(out_dir, labels_rel), records, meta);
        res.manifest.add_output(labels_rel);

        std::string bounds_rel = "bounds_" + key.file_stem() + ".csv";
        write_bounds_csv(join(out_dir, bounds_rel), records);
        res.manifest.add_output(bounds_rel);

        for (const auto& rec : records)
            if (rec.label == Label::Anomaly) ++res.anomaly_count;
        res.labels[key] = std::move(records);
        ++clusters_detected;
    }
    res.manifest.timings_ms.emplace_back("detect", ms_since(t0));

    res.manifest.notes.emplace_back("data_end", std::to_string(now));
    res.manifest.notes.emplace_back("stable_campaigns",
                                    std::to_string(res.stable.campaign_ids.size()));
    res.manifest.notes.emplace_back("clusters_detected", std::to_string(clusters_detected));
    res.manifest.notes.emplace_back("anomaly_count", std::to_string(res.anomaly_count));
    res.manifest.notes.emplace_back("detect_p", std::to_string(detect_p));
    note_warnings(res.manifest, warnings);

    res.manifest.add_output("manifest.json");
    res.manifest.write(join(out_dir, "manifest.json"));
    return res;
}

EvalResult run_eval(const std::string& labels_path, const std::string& truth_path,
                    const std::optional<std::string>& cluster_name,
                    const PipelineConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);

    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<StepRecord> records = read_labels_csv(labels_path, &meta);

    auto meta_value = [&meta](const std::string& key) -> std::optional<std::string> {
        for (const auto& [k, v] : meta)
            if (k == key) return v;
        return std::nullopt;
    };

    EvalResult res;
    if (cluster_name)
        res.cluster = ClusterKey::from_string(*cluster_name);
    else if (auto c = meta_value("cluster"))
        res.cluster = ClusterKey::from_string(*c);
    else
        throw ConfigError("cluster not given and the labels file carries no cluster header");

    GroundTruth truth = read_truth_csv(truth_path);

    std::vector<IncidentSpec> incidents;
    std::string incidents_path = (fs::path(truth_path).parent_path() / "incidents.csv").string();
    if (fs::exists(incidents_path)) {
        for (auto& inc : read_incidents_csv(incidents_path))
            if (std::find(inc.scope.begin(), inc.scope.end(), res.cluster) != inc.scope.end())
                incidents.push_back(std::move(inc));
    }

    // The hash of the config that produced the labels, when they carry one.
    std::string config_hash = meta_value("config").value_or(cfg.hash());

    res.report = evaluate(records, truth.hours_for(res.cluster), incidents, config_hash,
                          cfg.eval_tolerance_hours);

    res.manifest.command = "eval";
    res.manifest.config_hash = config_hash;
    res.manifest.output_dir = out_dir;

    std::string stem = res.cluster.file_stem();
    write_eval_report_text(join(out_dir, "eval_" + stem + ".txt"), res.report);
    res.manifest.add_output("eval_" + stem + ".txt");
    write_eval_report_csv(join(out_dir, "eval_" + stem + ".csv"), res.report);
    res.manifest.add_output("eval_" + stem + ".csv");

    res.manifest.notes.emplace_back("labels", labels_path);
    res.manifest.notes.emplace_back("truth", truth_path);
    res.manifest.notes.emplace_back("cluster", res.cluster.to_string());

    res.manifest.add_output("manifest.json");
    res.manifest.write(join(out_dir, "manifest.json"));
    return res;
}

namespace {

StableSet everyone(const LoadedData& loaded, Timestamp now, const PipelineConfig& cfg) {
    StableSet all;
    all.computed_at = now;
    all.config = cfg;
    for (const auto& c : loaded.portfolio) all.campaign_ids.insert(c.id);
    return all;
}

} // namespace

RunManifest run_export(const std::string& data_dir, const PipelineConfig& cfg,
                       const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);

    RunManifest manifest;
    manifest.command = "export";
    manifest.config_hash = cfg.hash();
    manifest.output_dir = out_dir;

    auto t0 = Clock::now();
    LoadedData loaded = load_data_dir(data_dir);
    const Timestamp now = loaded.data_end;
    std::vector<std::string> warnings;

    StableSet stable = refresh_stable_set(loaded.portfolio, loaded.series_by_id, now, cfg, &warnings);
    StableSet all = everyone(loaded, now, cfg);

    for (const auto& key : all_cluster_keys()) {
        for (const auto& [suffix, members] :
             std::initializer_list<std::pair<const char*, const StableSet*>>{
                 {"stable", &stable}, {"all", &all}}) {
            HourlySeries agg =
                aggregate_cluster(*members, key, loaded.portfolio, loaded.series_by_id, &warnings);
            if (agg.empty()) continue;

            std::string rel = "hourly_" + key.file_stem() + "_" + suffix + ".csv";
            write_hourly_csv(join(out_dir, rel), agg);
            manifest.add_output(rel);

            for (int p : cfg.p_values) {
                ChangeMetric cm = change_metric(agg, p, key, &warnings);
                std::string cm_rel =
                    "change_" + key.file_stem() + "_p" + std::to_string(p) + "_" + suffix + ".csv";
                write_change_metric_csv(join(out_dir, cm_rel), cm);
                manifest.add_output(cm_rel);
            }
        }
    }
    manifest.timings_ms.emplace_back("export", ms_since(t0));
    manifest.notes.emplace_back("stable_campaigns", std::to_string(stable.campaign_ids.size()));
    note_warnings(manifest, warnings);

    manifest.add_output("manifest.json");
    manifest.write(join(out_dir, "manifest.json"));
    return manifest;
}

ReportResult run_report(const std::string& data_dir, const PipelineConfig& cfg,
                        const std::string& out_dir) {
    cfg.validate();
    ensure_dir(out_dir);

    ReportResult res;
    res.manifest.command = "report";
    res.manifest.config_hash = cfg.hash();
    res.manifest.output_dir = out_dir;

    auto t0 = Clock::now();
    LoadedData loaded = load_data_dir(data_dir);
    const Timestamp now = loaded.data_end;
    std::vector<std::string> warnings;

    StableSet stable = refresh_stable_set(loaded.portfolio, loaded.series_by_id, now, cfg, &warnings);
    StableSet all = everyone(loaded, now, cfg);

    // Incident hours are excluded from the dispersion comparison when the
    // data directory carries a ground-truth file.
    GroundTruth truth;
    std::string truth_path = join(data_dir, "truth.csv");
    if (fs::exists(truth_path)) truth = read_truth_csv(truth_path);

    for (const auto& key : all_cluster_keys()) {
        HourlySeries agg_all =
            aggregate_cluster(all, key, loaded.portfolio, loaded.series_by_id, &warnings);
        HourlySeries agg_stable =
            aggregate_cluster(stable, key, loaded.portfolio, loaded.series_by_id, &warnings);
        if (agg_all.empty() || agg_stable.empty()) continue;

        std::map<int, ChangeMetric> cm_all;
        std::map<int, ChangeMetric> cm_stable;
        for (int p : cfg.p_values) {
            cm_all[p] = change_metric(agg_all, p, key, &warnings);
            cm_stable[p] = change_metric(agg_stable, p, key, &warnings);
        }
        try {
            res.rows[key] = stability_report(cm_all, cm_stable, truth.hours_for(key));
        } catch (const Error& e) {
            warnings.push_back("cluster " + key.to_string() + ": " + e.what());
        }
    }
    res.manifest.timings_ms.emplace_back("report", ms_since(t0));

    std::string rel = "stability.csv";
    std::ofstream out(join(out_dir, rel));
    if (!out) throw IoError("cannot open for writing", join(out_dir, rel));
    out << "cluster,p,mad_all,mad_stable,ratio\n";
    for (const auto& [key, rows] : res.rows)
        for (const auto& row : rows)
            out << key.to_string() << ',' << row.p << ',' << format_value(row.mad_all) << ','
                << format_value(row.mad_stable) << ',' << format_value(row.ratio) << '\n';
    if (!out) throw IoError("write failed", join(out_dir, rel));
    res.manifest.add_output(rel);

    res.manifest.notes.emplace_back("stable_campaigns", std::to_string(stable.campaign_ids.size()));
    note_warnings(res.manifest, warnings);

    res.manifest.add_output("manifest.json");
    res.manifest.write(join(out_dir, "manifest.json"));
    return res;
}

} // namespace campmon

// campmon: seasonal campaign-delivery monitoring pipeline.
//
//   simulate  generate a campaign portfolio and its metric store
//   detect    stable set -> cluster aggregates -> anomaly labels
//   eval      score a labels file against ground truth
//   export    plotting CSVs (hourly + change metrics, stable vs all)
//   report    stable-vs-all dispersion comparison
//
// Exit codes: 0 ok, 1 anomalies found under --monitor, 2 usage or config
// error, 3 data or I/O error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "campmon/pipeline.hpp"
#include "campmon/stability.hpp"

namespace fs = std::filesystem;

namespace {

std::string default_out(const std::string& cmd) {
    const char* env = std::getenv("CAMPMON_OUT");
    return (fs::path(env ? env : "out") / cmd).string();
}

// Config file plus per-field overrides shared by the pipeline subcommands.
struct ConfigArgs {
    std::string config_path;
    double alpha = 0.0;
    double beta_max = 0.0;
    double delta = 0.0;
    int training_len = 0;
    int shrink_window = 0;
    int tolerance = 0;
    std::vector<int> p_values;
    std::string beta_policy;
    std::string negative_mode;

    CLI::Option* alpha_opt = nullptr;
    CLI::Option* beta_max_opt = nullptr;
    CLI::Option* delta_opt = nullptr;
    CLI::Option* training_opt = nullptr;
    CLI::Option* shrink_opt = nullptr;
    CLI::Option* tolerance_opt = nullptr;
    CLI::Option* p_opt = nullptr;
    CLI::Option* beta_policy_opt = nullptr;
    CLI::Option* negative_mode_opt = nullptr;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Pipeline config file (key = value lines)")
            ->check(CLI::ExistingFile);
        alpha_opt = cmd->add_option("--alpha", alpha, "Detector decay factor");
        beta_max_opt = cmd->add_option("--beta-max", beta_max, "Widest normal range in sigmas");
        delta_opt = cmd->add_option("--delta", delta, "Stability correlation threshold");
        training_opt = cmd->add_option("--training-len", training_len, "Detector training points");
        shrink_opt = cmd->add_option("--shrink-window", shrink_window, "Label window for beta");
        tolerance_opt = cmd->add_option("--tolerance", tolerance, "Eval matching window in hours");
        p_opt = cmd->add_option("--p", p_values, "Seasonality periods in days");
        beta_policy_opt =
            cmd->add_option("--beta-policy", beta_policy, "per_step or on_anomaly");
        negative_mode_opt =
            cmd->add_option("--negative-mode", negative_mode, "below_mean or below_zero");
    }

    campmon::PipelineConfig resolve() const {
        campmon::PipelineConfig cfg;
        if (!config_path.empty()) cfg = campmon::load_config(config_path);
        if (alpha_opt->count()) cfg.alpha = alpha;
        if (beta_max_opt->count()) cfg.beta_max = beta_max;
        if (delta_opt->count()) cfg.delta = delta;
        if (training_opt->count()) cfg.training_len = training_len;
        if (shrink_opt->count()) cfg.shrink_window = shrink_window;
        if (tolerance_opt->count()) cfg.eval_tolerance_hours = tolerance;
        if (p_opt->count()) cfg.p_values = p_values;
        if (beta_policy_opt->count()) cfg.beta_policy = campmon::beta_policy_from_string(beta_policy);
        if (negative_mode_opt->count())
            cfg.negative_mode = campmon::negative_mode_from_string(negative_mode);
        cfg.validate();
        return cfg;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"campmon - seasonal campaign-delivery monitoring"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "campmon 0.1.0");

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a portfolio and its metric store");
    std::string scenario_path;
    std::optional<std::uint64_t> seed_override;
    std::uint64_t seed_value = 0;
    std::string sim_out;
    sim->add_option("--scenario", scenario_path, "Scenario file")
        ->required()
        ->check(CLI::ExistingFile);
    auto* seed_opt = sim->add_option("--seed", seed_value, "Override the scenario seed");
    sim->add_option("--out", sim_out, "Output directory");

    // detect
    auto* det = app.add_subcommand("detect", "Select stable campaigns and label anomalies");
    std::string det_data, det_out;
    bool monitor = false;
    ConfigArgs det_cfg;
    det->add_option("--data", det_data, "Data directory (simulate output)")
        ->required()
        ->check(CLI::ExistingDirectory);
    det->add_option("--out", det_out, "Output directory");
    det->add_flag("--monitor", monitor, "Exit 1 when any anomaly is labeled");
    det_cfg.add_to(det);

    // eval
    auto* ev = app.add_subcommand("eval", "Score labels against ground truth");
    std::string labels_path, truth_path, ev_out;
    std::string cluster_name;
    ConfigArgs ev_cfg;
    ev->add_option("--labels", labels_path, "Labels CSV from detect")
        ->required()
        ->check(CLI::ExistingFile);
    ev->add_option("--truth", truth_path, "Ground truth CSV")
        ->required()
        ->check(CLI::ExistingFile);
    auto* cluster_opt = ev->add_option("--cluster", cluster_name, "Cluster to score");
    ev->add_option("--out", ev_out, "Output directory");
    ev_cfg.add_to(ev);

    // export
    auto* ex = app.add_subcommand("export", "Write plotting CSVs");
    std::string ex_data, ex_out;
    ConfigArgs ex_cfg;
    ex->add_option("--data", ex_data, "Data directory (simulate output)")
        ->required()
        ->check(CLI::ExistingDirectory);
    ex->add_option("--out", ex_out, "Output directory");
    ex_cfg.add_to(ex);

    // report
    auto* rep = app.add_subcommand("report", "Stable-vs-all dispersion comparison");
    std::string rep_data, rep_out;
    ConfigArgs rep_cfg;
    rep->add_option("--data", rep_data, "Data directory (simulate output)")
        ->required()
        ->check(CLI::ExistingDirectory);
    rep->add_option("--out", rep_out, "Output directory");
    rep_cfg.add_to(rep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            if (seed_opt->count()) seed_override = seed_value;
            if (sim_out.empty()) sim_out = default_out("simulate");
            auto res = campmon::run_simulate(scenario_path, seed_override, sim_out);
            std::cout << "simulate: seed " << res.manifest.seed << ", " << res.put_lines
                      << " put lines -> " << sim_out << '\n';
        } else if (det->parsed()) {
            if (det_out.empty()) det_out = default_out("detect");
            auto cfg = det_cfg.resolve();
            auto res = campmon::run_detect(det_data, cfg, det_out);
            std::cout << "detect: " << res.stable.campaign_ids.size() << " stable campaigns, "
                      << res.labels.size() << " clusters, " << res.anomaly_count
                      << " anomalous hours -> " << det_out << '\n';
            for (const auto& [key, records] : res.labels) {
                long n = 0;
                for (const auto& r : records)
                    if (r.label == campmon::Label::Anomaly) ++n;
                if (n > 0) std::cout << "  " << key.to_string() << ": " << n << " anomalous hours\n";
            }
            if (monitor && res.anomaly_count > 0) return 1;
        } else if (ev->parsed()) {
            if (ev_out.empty()) ev_out = default_out("eval");
            auto cfg = ev_cfg.resolve();
            std::optional<std::string> cluster;
            if (cluster_opt->count()) cluster = cluster_name;
            auto res = campmon::run_eval(labels_path, truth_path, cluster, cfg, ev_out);
            const auto& r = res.report;
            std::cout << "eval " << res.cluster.to_string() << ": tp/fp/fn " << r.counts.tp << '/'
                      << r.counts.fp << '/' << r.counts.fn << ", precision " << r.precision
                      << ", recall " << r.recall << ", f1 " << r.f1 << " -> " << ev_out << '\n';
            for (const auto& lat : r.latencies) {
                std::cout << "  incident at " << lat.incident.start << " ("
                          << campmon::to_string(lat.incident.kind) << ", "
                          << lat.incident.duration_hours << "h): ";
                if (lat.hours)
                    std::cout << "detected after " << *lat.hours << "h\n";
                else
                    std::cout << "missed\n";
            }
        } else if (ex->parsed()) {
            if (ex_out.empty()) ex_out = default_out("export");
            auto cfg = ex_cfg.resolve();
            auto manifest = campmon::run_export(ex_data, cfg, ex_out);
            std::cout << "export: " << manifest.outputs.size() << " files -> " << ex_out << '\n';
        } else if (rep->parsed()) {
            if (rep_out.empty()) rep_out = default_out("report");
            auto cfg = rep_cfg.resolve();
            auto res = campmon::run_report(rep_data, cfg, rep_out);
            std::cout << "report -> " << rep_out << '\n';
            for (const auto& [key, rows] : res.rows)
                for (const auto& row : rows)
                    std::cout << "  " << key.to_string() << " p=" << row.p << ": mad all "
                              << row.mad_all << ", stable " << row.mad_stable << ", ratio "
                              << row.ratio << '\n';
        }
    } catch (const campmon::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const campmon::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

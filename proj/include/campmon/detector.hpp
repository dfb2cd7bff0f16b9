#pragma once

#include <span>
#include <string>
#include <vector>

#include "campmon/time.hpp"

namespace campmon {

struct ChangeMetric;

enum class Label { Normal, Anomaly, PositiveOutlier };

std::string to_string(Label l);
Label label_from_string(const std::string& s);

// When beta is recomputed from the label window.
// PerStep re-evaluates the ratio after every point so beta recovers as
// anomalies age out; OnAnomaly recomputes only when a point is flagged,
// matching the original update placement.
enum class BetaPolicy { PerStep, OnAnomaly };

// Which side of the range counts as anomalous: points below the running
// mean, or literally negative points.
enum class NegativeMode { BelowMean, BelowZero };

struct DetectorConfig {
    double alpha = 0.99;        // decay factor for the running sums
    double beta_max = 3.0;      // full width of the normal range in sigmas
    int shrink_window = 168;    // labels kept for the shrink ratio
    double sigma_floor = 1e-12; // lower bound on sigma in metric units
    BetaPolicy beta_policy = BetaPolicy::PerStep;
    NegativeMode negative_mode = NegativeMode::BelowMean;
};

// beta_max * N_normal / (N_normal + N_abnormal) over the window contents.
// Positive outliers count as normal. Window must be non-empty.
double shrink_beta(std::span<const Label> window, double beta_max = 3.0);

// Streaming detector over decayed Gaussian moments. Keeps the decayed sum,
// sum of squares and count, plus the recent-label window driving beta.
class DetectorState {
public:
    // Runs the update recurrence over the training points (assumed
    // anomaly-free, never labeled). Throws Error when training is empty.
    static DetectorState init(std::span<const double> training, const DetectorConfig& cfg);

    // Classifies one point and updates the state. The running sums only
    // absorb in-range points; both outlier kinds leave them untouched.
    Label step(double d);

    double mean() const { return sum_ / count_; }
    // Population-style sigma from the decayed moments, clamped at zero.
    double sigma() const;
    // Sigma as used in the range test (after the floor).
    double effective_sigma() const;
    double beta() const { return beta_; }
    const DetectorConfig& config() const { return cfg_; }

    double decayed_sum() const { return sum_; }
    double decayed_sum_squares() const { return sum_sq_; }
    double decayed_count() const { return count_; }

    // Pure classification rule, exposed for testing the gating behavior.
    static Label classify(double d, double mu, double sigma_eff, double beta,
                          NegativeMode mode);

private:
    DetectorState() = default;

    void absorb(double d);
    void push_label(Label window_entry);

    DetectorConfig cfg_;
    double sum_ = 0.0;
    double sum_sq_ = 0.0;
    double count_ = 0.0;
    double beta_ = 3.0;
    std::vector<Label> window_;
};

// One labeled point together with the state that judged it: mu, sigma and
// beta are the values used for the range test, so mu +/- beta*sigma redraws
// the bounds.
struct StepRecord {
    Timestamp hour = 0;
    double value = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
    double beta = 0.0;
    Label label = Label::Normal;
};

// Consumes the first training_len present points as training, labels the
// rest in time order. Gaps are skipped without touching the state. Throws
// Error when fewer than training_len present points exist.
std::vector<StepRecord> detect_series(const ChangeMetric& d, const DetectorConfig& cfg,
                                      int training_len);

// CSV: `hour,value,mu,sigma,beta,label`, preceded by `# key=value` comment
// lines carrying the metadata map.
void write_labels_csv(const std::string& path, const std::vector<StepRecord>& records,
                      const std::vector<std::pair<std::string, std::string>>& meta = {});
std::vector<StepRecord> read_labels_csv(const std::string& path,
                                        std::vector<std::pair<std::string, std::string>>* meta = nullptr);

// CSV: `hour,lower,upper` with the applied bounds.
void write_bounds_csv(const std::string& path, const std::vector<StepRecord>& records);

} // namespace campmon

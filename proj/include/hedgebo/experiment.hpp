#pragma once

// Seeded multi-trial benchmark runs, aggregation across trials, and the CSV
// and plot-data emitters.

#include <hedgebo/portfolio.hpp>
#include <hedgebo/testbed.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hedgebo {

/// EI xi=0.01, PI xi=0.01, GP-UCB delta=0.1 nu=0.2.
std::vector<AcquisitionSpec> default_portfolio();

/// PI and EI with xi in {0.01, 0.1, 1}, GP-UCB delta=0.1 with nu in {0.1, 0.2, 1}.
std::vector<AcquisitionSpec> nine_function_portfolio();

struct ExperimentConfig {
    std::string function_name = "branin";
    Strategy strategy = Strategy::Hedge;
    /// Label (or kind name) of the arm played by Strategy::Single.
    std::string single_spec;
    std::vector<AcquisitionSpec> portfolio_specs = default_portfolio();
    int iterations = 100;
    int trials = 25;
    std::uint64_t base_seed = 0;
    double eta = 1.0;
    double exp3_mix = 0.1;
    /// 0 means 1000 * d random candidates per proposal.
    int n_candidates = 0;
    int n_local_steps = 20;
    double local_shrink = 0.5;
    double noise_variance = 1e-6;
    /// Refit standardization and length scales every this many new
    /// observations; 0 disables refitting.
    int refit_interval = 5;
    bool standardize = true;
    int initial_points = 2;
    FitOptions fit;
    /// Worker threads for independent trials.
    int jobs = 1;
    /// Name of the series in emitted plot data.
    std::string series;

    void validate() const;
    /// Index of the single-strategy arm within portfolio_specs.
    std::size_t single_arm_index() const;
    ProposalBudget budget_for(std::size_t dim) const;
};

struct TrialRecord {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    Dataset dataset;
    std::vector<double> gap;           ///< one entry per observation
    RegretTrace regret;                ///< one entry per observation
    std::vector<std::size_t> chosen;   ///< one entry per iteration
    std::vector<std::vector<double>> probabilities;
    std::vector<double> final_gains;
    double wall_seconds = 0.0;
};

struct RunRecord {
    ExperimentConfig config;
    double f_opt = 0.0;
    std::vector<TrialRecord> trials;

    std::size_t failed_trials() const;
};

/// Runs config.trials independent trials on a registered function; trial k
/// uses seed base_seed + k. Throws ConfigError before any work when the
/// configuration is malformed.
RunRecord run_experiment(const ExperimentConfig& config);

/// Same, on an explicitly supplied objective.
RunRecord run_experiment(const ExperimentConfig& config, const TestFunction& fn);

/// One trial; exposed for reproducibility checks.
TrialRecord run_trial(const ExperimentConfig& config, const TestFunction& fn, std::uint64_t seed);

struct AggregateReport {
    std::string series;
    std::size_t trials_used = 0;
    std::size_t failed_trials = 0;
    /// False for a single trial; var_gap is then reported as zeros.
    bool variance_defined = false;
    std::size_t initial_points = 0;
    std::vector<double> mean_gap;
    std::vector<double> var_gap;
    std::vector<double> mean_cum_regret;
    std::vector<std::string> arm_labels;
    /// iterations x arms; row t holds the fraction of trials choosing each arm.
    std::vector<std::vector<double>> arm_frequency;
};

AggregateReport aggregate(const RunRecord& record);

/// `iteration,mean_gap,var_gap,mean_cum_regret`, one row per observation.
void emit_csv(const AggregateReport& report, const std::string& path);
std::string format_csv(const AggregateReport& report);

/// One whitespace-separated block per series, separated by two blank lines,
/// with arm-selection frequencies appended (nan for the initial design rows).
void emit_plotdata(std::span<const AggregateReport> reports, const std::string& path);
std::string format_plotdata(std::span<const AggregateReport> reports);

/// `ei:xi=0.01`, `pi`, `gpucb:delta=0.1,nu=0.2`, `ucb:lambda=2`,
/// `eipi:xi=0.01,lambda=1`, `thompson:candidates=500`. The text becomes the label.
AcquisitionSpec parse_acquisition_spec(const std::string& text);

/// `hedge`, `exp3` or `single:<spec label or kind>`.
void apply_strategy(ExperimentConfig& config, const std::string& text);

/// Applies one key=value setting. Throws ConfigError for unknown keys or bad values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

struct ConfigFile {
    std::vector<std::pair<std::string, std::string>> entries;
};

/// Plain-text key=value lines; '#' starts a comment. Keys may repeat.
ConfigFile read_config_file(const std::string& path);

}  // namespace hedgebo

#include <hedgebo/experiment.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace hedgebo {

std::vector<AcquisitionSpec> default_portfolio() {
    return {AcquisitionSpec::ei(0.01), AcquisitionSpec::pi(0.01), AcquisitionSpec::gp_ucb(0.1, 0.2)};
}

std::vector<AcquisitionSpec> nine_function_portfolio() {
    std::vector<AcquisitionSpec> specs;
    for (const double xi : {0.01, 0.1, 1.0}) {
        specs.push_back(AcquisitionSpec::pi(xi));
    }
    for (const double xi : {0.01, 0.1, 1.0}) {
        specs.push_back(AcquisitionSpec::ei(xi));
    }
    for (const double nu : {0.1, 0.2, 1.0}) {
        specs.push_back(AcquisitionSpec::gp_ucb(0.1, nu));
    }
    return specs;
}

void ExperimentConfig::validate() const {
    if (iterations < 1) throw ConfigError("iterations must be at least 1");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (portfolio_specs.empty()) throw ConfigError("portfolio needs at least one acquisition spec");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be positive");
    if (!(exp3_mix >= 0.0 && exp3_mix <= 1.0)) throw ConfigError("exp3_mix must lie in [0, 1]");
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
        throw ConfigError("noise_variance must be non-negative");
    }
    if (refit_interval < 0) throw ConfigError("refit_interval must be non-negative");
    if (initial_points < 1) throw ConfigError("initial_points must be at least 1");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    if (fit.starts < 1 || fit.passes < 0 || fit.golden_iterations < 0) {
        throw ConfigError("hyperparameter fit options out of range");
    }
    try {
        for (const auto& spec : portfolio_specs) {
            spec.validate();
        }
        if (n_candidates < 0) {
            throw InvalidArgument("n_candidates must be non-negative");
        }
        budget_for(1).validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (strategy == Strategy::Single) {
        single_arm_index();
    }
}

std::size_t ExperimentConfig::single_arm_index() const {
    for (std::size_t i = 0; i < portfolio_specs.size(); ++i) {
        if (portfolio_specs[i].label == single_spec) {
            return i;
        }
    }
    std::optional<std::size_t> by_kind;
    for (std::size_t i = 0; i < portfolio_specs.size(); ++i) {
        if (to_string(portfolio_specs[i].kind) == single_spec) {
            if (by_kind) {
                throw ConfigError("single strategy '" + single_spec + "' matches several specs; use the full label");
            }
            by_kind = i;
        }
    }
    if (!by_kind) {
        throw ConfigError("single strategy '" + single_spec + "' matches no spec in the portfolio");
    }
    return *by_kind;
}

ProposalBudget ExperimentConfig::budget_for(std::size_t dim) const {
    ProposalBudget b = ProposalBudget::defaults_for(dim);
    if (n_candidates > 0) {
        b.n_candidates = n_candidates;
    }
    b.n_local_steps = n_local_steps;
    b.local_shrink = local_shrink;
    return b;
}

std::size_t RunRecord::failed_trials() const {
    std::size_t n = 0;
    for (const auto& t : trials) {
        n += t.ok ? 0 : 1;
    }
    return n;
}

namespace {

// Independent stream for hyperparameter fitting so refits never shift the
// proposal and selection draws.
Rng fit_stream(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6669u};
    return Rng(seq);
}

KernelParams initial_params(const BoxDomain& domain, double noise_variance) {
    // Geometric centre of the default length-scale bounds.
    KernelParams p;
    p.theta = domain.ranges() * std::sqrt(1e-2 * 10.0);
    p.noise_variance = noise_variance;
    return p;
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& config, const TestFunction& fn, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.seed = seed;

    const BoxDomain& domain = fn.domain;
    const ProposalBudget budget = config.budget_for(domain.dim());
    const std::vector<Interval> theta_bounds = default_theta_bounds(domain);
    const Interval noise_bounds{config.noise_variance, config.noise_variance};
    const std::size_t single_arm = config.strategy == Strategy::Single ? config.single_arm_index() : 0;

    Rng rng(seed);
    Rng fit_rng = fit_stream(seed);

    try {
        Dataset data(domain.dim());
        const Eigen::MatrixXd design = domain.latin_hypercube(static_cast<std::size_t>(config.initial_points), rng);
        for (Eigen::Index j = 0; j < design.cols(); ++j) {
            const Point x = design.col(j);
            const double y = fn.evaluate(x);
            if (!std::isfinite(y)) {
                throw EvaluationError("objective returned a non-finite value", x);
            }
            data.add(x, y);
        }

        Surrogate surrogate{initial_params(domain, config.noise_variance), {}};
        if (config.standardize) {
            surrogate.scaling = OutputScaling::standardizing(data);
        }
        std::size_t last_fit_size = data.size();

        PortfolioState state = PortfolioState::initial(config.portfolio_specs.size(), config.strategy, config.eta,
                                                       config.exp3_mix, single_arm);
        for (int it = 0; it < config.iterations; ++it) {
            if (config.refit_interval > 0 &&
                data.size() - last_fit_size >= static_cast<std::size_t>(config.refit_interval)) {
                if (config.standardize) {
                    surrogate.scaling = OutputScaling::standardizing(data);
                }
                FitOptions fit = config.fit;
                fit.warm_start = surrogate.params;
                surrogate.params =
                    fit_hyperparams(rescaled(data, surrogate.scaling), theta_bounds, noise_bounds, fit_rng, fit);
                last_fit_size = data.size();
            }
            StepResult step = gp_hedge_step(state, data, config.portfolio_specs, fn.evaluate, domain, budget,
                                            surrogate, rng);
            rec.chosen.push_back(step.chosen);
            rec.probabilities.push_back(std::move(step.probabilities));
            state = std::move(step.state);
            data = std::move(step.dataset);
        }

        rec.gap = gap_trace(data, fn.known_opt_value);
        rec.regret = regret_traces(data, fn.known_opt_value);
        rec.final_gains = state.gains;
        rec.dataset = std::move(data);
        rec.ok = true;
    } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

RunRecord run_experiment(const ExperimentConfig& config, const TestFunction& fn) {
    config.validate();
    RunRecord record;
    record.config = config;
    record.f_opt = fn.known_opt_value;
    record.trials.resize(static_cast<std::size_t>(config.trials));

    const auto n = static_cast<std::size_t>(config.trials);
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), n);
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) {
            record.trials[k] = run_trial(config, fn, config.base_seed + k);
        }
        return record;
    }

    // Each trial writes only its own slot, so completion order is irrelevant.
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < n; k = next++) {
                record.trials[k] = run_trial(config, fn, config.base_seed + k);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    return record;
}

RunRecord run_experiment(const ExperimentConfig& config) {
    const TestFunctionRegistry& registry = default_registry();
    if (!registry.contains(config.function_name)) {
        throw ConfigError("unknown test function: " + config.function_name);
    }
    return run_experiment(config, registry.find(config.function_name));
}

AggregateReport aggregate(const RunRecord& record) {
    std::vector<const TrialRecord*> ok;
    for (const auto& t : record.trials) {
        if (t.ok) {
            ok.push_back(&t);
        }
    }
    if (ok.empty()) {
        throw EmptyAggregate("no successful trials to aggregate");
    }

    AggregateReport report;
    report.series = record.config.series;
    report.trials_used = ok.size();
    report.failed_trials = record.trials.size() - ok.size();
    report.variance_defined = ok.size() > 1;
    report.initial_points = static_cast<std::size_t>(record.config.initial_points);
    for (const auto& spec : record.config.portfolio_specs) {
        report.arm_labels.push_back(spec.label);
    }

    const std::size_t len = ok.front()->gap.size();
    const std::size_t iters = ok.front()->chosen.size();
    for (const auto* t : ok) {
        if (t->gap.size() != len || t->regret.cumulative.size() != len || t->chosen.size() != iters) {
            throw InvalidArgument("trial traces have inconsistent lengths");
        }
    }

    const double n = static_cast<double>(ok.size());
    report.mean_gap.assign(len, 0.0);
    report.var_gap.assign(len, 0.0);
    report.mean_cum_regret.assign(len, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
        double sum = 0.0;
        double regret = 0.0;
        for (const auto* t : ok) {
            sum += t->gap[i];
            regret += t->regret.cumulative[i];
        }
        const double mean = sum / n;
        report.mean_gap[i] = mean;
        report.mean_cum_regret[i] = regret / n;
        if (report.variance_defined) {
            double ss = 0.0;
            for (const auto* t : ok) {
                const double d = t->gap[i] - mean;
                ss += d * d;
            }
            report.var_gap[i] = ss / (n - 1.0);
        }
    }

    const std::size_t arms = record.config.portfolio_specs.size();
    report.arm_frequency.assign(iters, std::vector<double>(arms, 0.0));
    for (std::size_t it = 0; it < iters; ++it) {
        for (const auto* t : ok) {
            report.arm_frequency[it][t->chosen[it]] += 1.0;
        }
        for (double& f : report.arm_frequency[it]) {
            f /= n;
        }
    }
    return report;
}

}  // namespace hedgebo

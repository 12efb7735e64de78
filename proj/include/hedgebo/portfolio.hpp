#pragma once

// Bandit allocation over a portfolio of acquisition functions: GP-Hedge with
// full-information rewards, Exp3 with importance-weighted partial rewards, and
// a single-arm baseline.

#include <hedgebo/acquisition.hpp>
#include <hedgebo/gp.hpp>
#include <hedgebo/optimizer.hpp>

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hedgebo {

enum class Strategy { Hedge, Exp3, Single };

struct PortfolioState {
    std::vector<double> gains;
    double eta = 1.0;
    double exp3_mix = 0.1;
    Strategy strategy = Strategy::Hedge;
    std::size_t single_arm = 0;  ///< only read by Strategy::Single
    int steps = 0;               ///< completed iterations; the next one is t = steps + 1

    /// Zero gains for n arms.
    static PortfolioState initial(std::size_t n_arms, Strategy strategy, double eta = 1.0,
                                  double exp3_mix = 0.1, std::size_t single_arm = 0);

    void validate() const;
};

struct NomineeSet {
    std::vector<Point> nominees;
    std::vector<double> rewards;
};

/// Softmax of eta * gains, shifted by the maximum gain.
std::vector<double> hedge_probabilities(std::span<const double> gains, double eta);

/// (1 - mix) * hedge + mix * uniform.
std::vector<double> exp3_probabilities(std::span<const double> gains, double eta, double mix);

/// Distribution the state's strategy selects from.
std::vector<double> selection_probabilities(const PortfolioState& state);

/// Inverse-CDF categorical draw. A one-element distribution returns 0 without
/// consuming randomness.
std::size_t select_nominee(std::span<const double> probs, Rng& rng);

/// Posterior mean of the updated model at every nominee.
std::vector<double> compute_rewards(const GpModel& model_after_update, std::span<const Point> nominees);

PortfolioState update_gains(const PortfolioState& state, std::span<const double> rewards, std::size_t chosen);

using Objective = std::function<double(const Point&)>;

/// Kernel parameters plus the affine map from raw objective values to the
/// values the GP is fit on.
struct Surrogate {
    KernelParams params;
    OutputScaling scaling;
};

struct StepResult {
    PortfolioState state;
    Dataset dataset;
    std::size_t chosen = 0;
    NomineeSet nominees;
    std::vector<double> probabilities;
    double y = 0.0;  ///< raw objective value at the chosen nominee
};

/// GP model on the rescaled dataset.
GpModel build_surrogate(const Dataset& raw, const Surrogate& surrogate);

/// Incumbent on the rescaled values; f_plus is 0 (the prior mean) for an empty dataset.
IncumbentContext incumbent_context(const Dataset& raw, const Surrogate& surrogate, int t, std::size_t dim);

/// Nominee of one arm; Thompson arms use a joint posterior draw.
Point nominate(const GpModel& model, const AcquisitionSpec& spec, const BoxDomain& domain,
               const IncumbentContext& ctx, const ProposalBudget& budget, Rng& rng);

/// One full iteration: model on D_{1:t-1}, one nominee per arm, selection,
/// evaluation, augmentation, model on D_{1:t}, rewards, gain update.
/// Randomness is consumed by the nominations (in arm order) and then by the
/// selection draw.
StepResult gp_hedge_step(const PortfolioState& state, const Dataset& dataset,
                         std::span<const AcquisitionSpec> specs, const Objective& objective,
                         const BoxDomain& domain, const ProposalBudget& budget,
                         const Surrogate& surrogate, Rng& rng);

}  // namespace hedgebo

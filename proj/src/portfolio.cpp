#include <hedgebo/portfolio.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace hedgebo {

namespace {

void check_gains(std::span<const double> gains, double eta) {
    if (gains.empty()) {
        throw InvalidArgument("gain vector is empty");
    }
    if (!std::all_of(gains.begin(), gains.end(), [](double g) { return std::isfinite(g); })) {
        throw InvalidArgument("gains must be finite");
    }
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw InvalidArgument("eta must be positive");
    }
}

}  // namespace

PortfolioState PortfolioState::initial(std::size_t n_arms, Strategy strategy, double eta, double exp3_mix,
                                       std::size_t single_arm) {
    PortfolioState s;
    s.gains.assign(n_arms, 0.0);
    s.eta = eta;
    s.exp3_mix = exp3_mix;
    s.strategy = strategy;
    s.single_arm = single_arm;
    s.validate();
    return s;
}

void PortfolioState::validate() const {
    if (gains.empty()) {
        throw InvalidArgument("portfolio needs at least one arm");
    }
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw InvalidArgument("eta must be positive");
    }
    if (!(exp3_mix >= 0.0 && exp3_mix <= 1.0)) {
        throw InvalidArgument("exp3 mixing weight must lie in [0, 1]");
    }
    if (strategy == Strategy::Single && single_arm >= gains.size()) {
        throw InvalidArgument("single-arm index out of range");
    }
}

std::vector<double> hedge_probabilities(std::span<const double> gains, double eta) {
    check_gains(gains, eta);
    const double top = *std::max_element(gains.begin(), gains.end());
    std::vector<double> p(gains.size());
    double total = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        p[i] = std::exp(eta * (gains[i] - top));
        total += p[i];
    }
    for (double& v : p) {
        // Arms far behind would underflow to exactly zero.
        v = std::max(v / total, std::numeric_limits<double>::min());
    }
    return p;
}

std::vector<double> exp3_probabilities(std::span<const double> gains, double eta, double mix) {
    if (!(mix >= 0.0 && mix <= 1.0)) {
        throw InvalidArgument("exp3 mixing weight must lie in [0, 1]");
    }
    std::vector<double> p = hedge_probabilities(gains, eta);
    if (mix == 0.0) {
        return p;
    }
    const double uniform = 1.0 / static_cast<double>(p.size());
    for (double& v : p) {
        v = (1.0 - mix) * v + mix * uniform;
    }
    return p;
}

std::vector<double> selection_probabilities(const PortfolioState& state) {
    state.validate();
    switch (state.strategy) {
        case Strategy::Hedge: return hedge_probabilities(state.gains, state.eta);
        case Strategy::Exp3: return exp3_probabilities(state.gains, state.eta, state.exp3_mix);
        case Strategy::Single: {
            std::vector<double> p(state.gains.size(), 0.0);
            p[state.single_arm] = 1.0;
            return p;
        }
    }
    throw InvalidArgument("unknown strategy");
}

std::size_t select_nominee(std::span<const double> probs, Rng& rng) {
    if (probs.empty()) {
        throw InvalidArgument("empty probability vector");
    }
    double total = 0.0;
    for (const double p : probs) {
        if (!std::isfinite(p) || p < 0.0) {
            throw InvalidArgument("probabilities must be finite and non-negative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "probabilities sum to " << total << ", not 1";
        throw InvalidArgument(msg.str());
    }
    if (probs.size() == 1) {
        return 0;
    }
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) {
            last_positive = i;
        }
        cumulative += probs[i];
        if (u < cumulative && probs[i] > 0.0) {
            return i;
        }
    }
    return last_positive;
}

std::vector<double> compute_rewards(const GpModel& model_after_update, std::span<const Point> nominees) {
    std::vector<double> rewards;
    rewards.reserve(nominees.size());
    for (const auto& x : nominees) {
        rewards.push_back(predict(model_after_update, x).mean);
    }
    return rewards;
}

PortfolioState update_gains(const PortfolioState& state, std::span<const double> rewards, std::size_t chosen) {
    state.validate();
    if (rewards.size() != state.gains.size()) {
        throw InvalidArgument("one reward per arm is required");
    }
    if (chosen >= state.gains.size()) {
        throw InvalidArgument("chosen arm index out of range");
    }
    PortfolioState next = state;
    switch (state.strategy) {
        case Strategy::Hedge:
            for (std::size_t i = 0; i < rewards.size(); ++i) {
                next.gains[i] += rewards[i];
            }
            break;
        case Strategy::Exp3: {
            // Importance weight uses the unmixed Hedge distribution.
            const std::vector<double> p_hat = hedge_probabilities(state.gains, state.eta);
            next.gains[chosen] += rewards[chosen] / p_hat[chosen];
            break;
        }
        case Strategy::Single:
            break;
    }
    return next;
}

GpModel build_surrogate(const Dataset& raw, const Surrogate& surrogate) {
    return build_model(rescaled(raw, surrogate.scaling), surrogate.params);
}

IncumbentContext incumbent_context(const Dataset& raw, const Surrogate& surrogate, int t, std::size_t dim) {
    IncumbentContext ctx;
    ctx.f_plus = raw.empty() ? 0.0 : surrogate.scaling.apply(raw.best_value());
    ctx.t = t;
    ctx.d = static_cast<int>(dim);
    return ctx;
}

Point nominate(const GpModel& model, const AcquisitionSpec& spec, const BoxDomain& domain,
               const IncumbentContext& ctx, const ProposalBudget& budget, Rng& rng) {
    if (spec.kind == AcquisitionKind::Thompson) {
        spec.validate();
        return propose_thompson(model, domain, spec.thompson_candidates, rng);
    }
    return propose(model, spec, domain, ctx, budget, rng).point;
}

StepResult gp_hedge_step(const PortfolioState& state, const Dataset& dataset,
                         std::span<const AcquisitionSpec> specs, const Objective& objective,
                         const BoxDomain& domain, const ProposalBudget& budget,
                         const Surrogate& surrogate, Rng& rng) {
    state.validate();
    if (specs.size() != state.gains.size()) {
        throw InvalidArgument("number of acquisition specs does not match the portfolio");
    }
    if (!dataset.empty() && dataset.dim() != domain.dim()) {
        throw InvalidArgument("dataset dimension does not match the domain");
    }

    const int t = state.steps + 1;
    const GpModel before = build_surrogate(dataset, surrogate);
    const IncumbentContext ctx = incumbent_context(dataset, surrogate, t, domain.dim());

    StepResult out;
    out.nominees.nominees.reserve(specs.size());
    for (const auto& spec : specs) {
        out.nominees.nominees.push_back(nominate(before, spec, domain, ctx, budget, rng));
    }

    out.probabilities = selection_probabilities(state);
    out.chosen = state.strategy == Strategy::Single ? state.single_arm : select_nominee(out.probabilities, rng);

    const Point& x = out.nominees.nominees[out.chosen];
    out.y = objective(x);
    if (!std::isfinite(out.y)) {
        throw EvaluationError("objective returned a non-finite value", x);
    }

    out.dataset = dataset;
    out.dataset.add(x, out.y);

    const GpModel after = build_surrogate(out.dataset, surrogate);
    out.nominees.rewards = compute_rewards(after, out.nominees.nominees);
    out.state = update_gains(state, out.nominees.rewards, out.chosen);
    out.state.steps = state.steps + 1;
    return out;
}

}  // namespace hedgebo

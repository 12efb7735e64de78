#include <hedgebo/optimizer.hpp>

#include <cmath>
#include <limits>

namespace hedgebo {

namespace {

void check_domain(const GpModel& model, const BoxDomain& domain) {
    if (domain.dim() != model.dim()) {
        throw InvalidArgument("domain dimension does not match the model");
    }
}

Eigen::MatrixXd draw_candidates(const BoxDomain& domain, int n, Rng& rng) {
    Eigen::MatrixXd cands(static_cast<Eigen::Index>(domain.dim()), n);
    for (int j = 0; j < n; ++j) {
        cands.col(j) = domain.sample_uniform(rng);
    }
    return cands;
}

double value_at(const GpModel& model, const AcquisitionSpec& spec, const IncumbentContext& ctx,
                const Point& x) {
    return acquisition_value(spec, predict(model, x), ctx);
}

}  // namespace

void ProposalBudget::validate() const {
    if (n_candidates < 1) {
        throw InvalidArgument("proposal budget needs at least one candidate");
    }
    if (n_local_steps < 0) {
        throw InvalidArgument("local step count must be non-negative");
    }
    if (!(local_shrink > 0.0 && local_shrink < 1.0)) {
        throw InvalidArgument("local shrink factor must lie in (0, 1)");
    }
}

ProposalBudget ProposalBudget::defaults_for(std::size_t dim) {
    ProposalBudget b;
    b.n_candidates = static_cast<int>(1000 * dim);
    return b;
}

Proposal propose_from(const GpModel& model, const AcquisitionSpec& spec, const BoxDomain& domain,
                      const IncumbentContext& ctx, const Eigen::MatrixXd& candidates,
                      const ProposalBudget& budget) {
    check_domain(model, domain);
    budget.validate();
    spec.validate();
    if (spec.kind == AcquisitionKind::Thompson) {
        throw UnsupportedDispatch("thompson sampling is proposed with propose_thompson");
    }
    if (candidates.cols() == 0) {
        throw InvalidArgument("no candidates to scan");
    }

    const PosteriorBatch post = predict_batch(model, candidates);
    Eigen::Index best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < candidates.cols(); ++j) {
        const double v = acquisition_value(spec, {post.mean[j], post.variance[j]}, ctx);
        if (v > best_value) {
            best_value = v;
            best = j;
        }
    }

    Proposal out{candidates.col(best), best_value, best_value};
    const Eigen::VectorXd ranges = domain.ranges();
    double step_scale = 1.0;
    for (int k = 0; k < budget.n_local_steps; ++k) {
        step_scale *= budget.local_shrink;
        Point step_best = out.point;
        double step_value = out.value;
        for (Eigen::Index dim = 0; dim < ranges.size(); ++dim) {
            for (const double sign : {-1.0, 1.0}) {
                Point trial = out.point;
                trial[dim] += sign * step_scale * ranges[dim];
                trial = domain.clip(std::move(trial));
                const double v = value_at(model, spec, ctx, trial);
                if (v > step_value) {
                    step_value = v;
                    step_best = std::move(trial);
                }
            }
        }
        out.point = std::move(step_best);
        out.value = step_value;
    }
    return out;
}

Proposal propose(const GpModel& model, const AcquisitionSpec& spec, const BoxDomain& domain,
                 const IncumbentContext& ctx, const ProposalBudget& budget, Rng& rng) {
    check_domain(model, domain);
    budget.validate();
    const Eigen::MatrixXd cands = draw_candidates(domain, budget.n_candidates, rng);
    return propose_from(model, spec, domain, ctx, cands, budget);
}

Point propose_thompson(const GpModel& model, const BoxDomain& domain, int n_candidates, Rng& rng) {
    check_domain(model, domain);
    if (n_candidates < 1) {
        throw InvalidArgument("thompson proposal needs at least one candidate");
    }
    const Eigen::MatrixXd cands = draw_candidates(domain, n_candidates, rng);
    const Eigen::VectorXd draw = sample_posterior(model, cands, rng);
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < draw.size(); ++j) {
        if (draw[j] > draw[best]) {
            best = j;
        }
    }
    return cands.col(best);
}

}  // namespace hedgebo

#pragma once

// Inner maximization of an acquisition function over the box: seeded random
// candidates followed by an axis-aligned pattern search.

#include <hedgebo/acquisition.hpp>
#include <hedgebo/gp.hpp>

namespace hedgebo {

struct ProposalBudget {
    int n_candidates = 1000;
    int n_local_steps = 20;
    double local_shrink = 0.5;

    void validate() const;

    /// 1000 * d random candidates, 20 refinement steps, shrink 0.5.
    static ProposalBudget defaults_for(std::size_t dim);
};

struct Proposal {
    Point point;
    double value = 0.0;           ///< acquisition value at `point`
    double best_raw_value = 0.0;  ///< best value among the random candidates
};

/// Nominee of a pointwise acquisition function. Candidates are drawn up front;
/// ties keep the first candidate in draw order.
Proposal propose(const GpModel& model, const AcquisitionSpec& spec, const BoxDomain& domain,
                 const IncumbentContext& ctx, const ProposalBudget& budget, Rng& rng);

/// Same as propose() but scanning a fixed candidate set (columns, d x m)
/// instead of random draws.
Proposal propose_from(const GpModel& model, const AcquisitionSpec& spec, const BoxDomain& domain,
                      const IncumbentContext& ctx, const Eigen::MatrixXd& candidates,
                      const ProposalBudget& budget);

/// Argmax of one joint posterior draw over n_candidates uniform points.
Point propose_thompson(const GpModel& model, const BoxDomain& domain, int n_candidates, Rng& rng);

}  // namespace hedgebo

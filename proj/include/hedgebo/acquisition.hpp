#pragma once

#include <hedgebo/gp.hpp>

#include <functional>
#include <string>

namespace hedgebo {

enum class AcquisitionKind { PI, EI, UCB, EIPI, GPUCB, Thompson };

std::string to_string(AcquisitionKind kind);

/// Exploration-exploitation schedule for GP-UCB: beta(t, d, delta, nu).
using BetaSchedule = std::function<double(int t, int d, double delta, double nu)>;

/// One acquisition function with its parameters. Only the fields relevant to
/// `kind` are consulted.
struct AcquisitionSpec {
    AcquisitionKind kind = AcquisitionKind::EI;
    double xi = 0.01;      ///< improvement margin for PI, EI and EI-PI
    double lambda = 1.0;   ///< UCB weight; EI weight in EI-PI
    double delta = 0.1;    ///< GP-UCB confidence
    double nu = 0.2;       ///< GP-UCB scale
    int thompson_candidates = 500;
    /// Empty means gp_ucb_beta.
    BetaSchedule beta_schedule;
    /// Display name, e.g. "ei:xi=0.01".
    std::string label;

    void validate() const;

    static AcquisitionSpec pi(double xi = 0.01);
    static AcquisitionSpec ei(double xi = 0.01);
    static AcquisitionSpec ucb(double lambda);
    static AcquisitionSpec eipi(double xi, double lambda);
    static AcquisitionSpec gp_ucb(double delta = 0.1, double nu = 0.2);
    static AcquisitionSpec thompson(int candidates = 500);
};

/// Best observed value so far plus the iteration and dimension the GP-UCB
/// schedule needs.
struct IncumbentContext {
    double f_plus = 0.0;
    int t = 1;
    int d = 1;
};

double normal_cdf(double z);
double normal_pdf(double z);

/// Phi((mean - f_plus - xi) / sigma); the sigma = 0 limit is the indicator of
/// strict improvement.
double pi_value(const PosteriorGaussian& post, const IncumbentContext& ctx, double xi);

/// (mean - f_plus - xi) Phi(Z) + sigma phi(Z); zero when sigma = 0.
double ei_value(const PosteriorGaussian& post, const IncumbentContext& ctx, double xi);

double ucb_value(const PosteriorGaussian& post, double lambda);

/// nu * 2 log(t^(d/2 + 2) pi^2 / (3 delta)).
double gp_ucb_beta(int t, int d, double delta, double nu);

double gp_ucb_value(const PosteriorGaussian& post, double beta_t);

double eipi_value(const PosteriorGaussian& post, const IncumbentContext& ctx, double xi, double lambda);

/// Pointwise dispatch. Thompson sampling is set-level and throws
/// UnsupportedDispatch here.
double acquisition_value(const AcquisitionSpec& spec, const PosteriorGaussian& post,
                         const IncumbentContext& ctx);

}  // namespace hedgebo

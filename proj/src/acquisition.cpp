#include <hedgebo/acquisition.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hedgebo {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw InvalidArgument(std::string(what) + " is not finite");
    }
}

double checked_sigma(const PosteriorGaussian& post) {
    require_finite(post.mean, "posterior mean");
    require_finite(post.variance, "posterior variance");
    if (post.variance < 0.0) {
        throw InvalidArgument("posterior variance is negative");
    }
    return std::sqrt(post.variance);
}

void check_context(const IncumbentContext& ctx) {
    require_finite(ctx.f_plus, "incumbent value");
}

void check_xi(double xi) {
    require_finite(xi, "xi");
    if (xi < 0.0) {
        throw InvalidArgument("xi must be non-negative");
    }
}

std::string format_number(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

}  // namespace

std::string to_string(AcquisitionKind kind) {
    switch (kind) {
        case AcquisitionKind::PI: return "pi";
        case AcquisitionKind::EI: return "ei";
        case AcquisitionKind::UCB: return "ucb";
        case AcquisitionKind::EIPI: return "eipi";
        case AcquisitionKind::GPUCB: return "gpucb";
        case AcquisitionKind::Thompson: return "thompson";
    }
    return "unknown";
}

void AcquisitionSpec::validate() const {
    switch (kind) {
        case AcquisitionKind::PI:
        case AcquisitionKind::EI:
            check_xi(xi);
            break;
        case AcquisitionKind::UCB:
            require_finite(lambda, "lambda");
            if (lambda < 0.0) throw InvalidArgument("lambda must be non-negative");
            break;
        case AcquisitionKind::EIPI:
            check_xi(xi);
            require_finite(lambda, "lambda");
            if (lambda < 0.0) throw InvalidArgument("lambda must be non-negative");
            break;
        case AcquisitionKind::GPUCB:
            if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
            if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidArgument("nu must be positive");
            break;
        case AcquisitionKind::Thompson:
            if (thompson_candidates < 1) throw InvalidArgument("thompson needs at least one candidate");
            break;
    }
}

AcquisitionSpec AcquisitionSpec::pi(double xi) {
    AcquisitionSpec s;
    s.kind = AcquisitionKind::PI;
    s.xi = xi;
    s.label = "pi:xi=" + format_number(xi);
    return s;
}

AcquisitionSpec AcquisitionSpec::ei(double xi) {
    AcquisitionSpec s;
    s.kind = AcquisitionKind::EI;
    s.xi = xi;
    s.label = "ei:xi=" + format_number(xi);
    return s;
}

AcquisitionSpec AcquisitionSpec::ucb(double lambda) {
    AcquisitionSpec s;
    s.kind = AcquisitionKind::UCB;
    s.lambda = lambda;
    s.label = "ucb:lambda=" + format_number(lambda);
    return s;
}

AcquisitionSpec AcquisitionSpec::eipi(double xi, double lambda) {
    AcquisitionSpec s;
    s.kind = AcquisitionKind::EIPI;
    s.xi = xi;
    s.lambda = lambda;
    s.label = "eipi:xi=" + format_number(xi) + ",lambda=" + format_number(lambda);
    return s;
}

AcquisitionSpec AcquisitionSpec::gp_ucb(double delta, double nu) {
    AcquisitionSpec s;
    s.kind = AcquisitionKind::GPUCB;
    s.delta = delta;
    s.nu = nu;
    s.label = "gpucb:delta=" + format_number(delta) + ",nu=" + format_number(nu);
    return s;
}

AcquisitionSpec AcquisitionSpec::thompson(int candidates) {
    AcquisitionSpec s;
    s.kind = AcquisitionKind::Thompson;
    s.thompson_candidates = candidates;
    s.label = "thompson:candidates=" + std::to_string(candidates);
    return s;
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double pi_value(const PosteriorGaussian& post, const IncumbentContext& ctx, double xi) {
    const double sigma = checked_sigma(post);
    check_context(ctx);
    check_xi(xi);
    const double margin = post.mean - ctx.f_plus - xi;
    if (sigma == 0.0) {
        return margin > 0.0 ? 1.0 : 0.0;
    }
    return std::clamp(normal_cdf(margin / sigma), 0.0, 1.0);
}

double ei_value(const PosteriorGaussian& post, const IncumbentContext& ctx, double xi) {
    const double sigma = checked_sigma(post);
    check_context(ctx);
    check_xi(xi);
    if (sigma == 0.0) {
        return 0.0;
    }
    const double margin = post.mean - ctx.f_plus - xi;
    const double z = margin / sigma;
    // Cancellation for very negative z can leave a tiny negative residue.
    return std::max(0.0, margin * normal_cdf(z) + sigma * normal_pdf(z));
}

double ucb_value(const PosteriorGaussian& post, double lambda) {
    const double sigma = checked_sigma(post);
    require_finite(lambda, "lambda");
    if (lambda < 0.0) {
        throw InvalidArgument("lambda must be non-negative");
    }
    return post.mean + lambda * sigma;
}

double gp_ucb_beta(int t, int d, double delta, double nu) {
    if (t < 1 || d < 1) {
        throw InvalidArgument("GP-UCB schedule needs t >= 1 and d >= 1");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidArgument("delta must lie in (0, 1)");
    }
    if (!(nu > 0.0) || !std::isfinite(nu)) {
        throw InvalidArgument("nu must be positive");
    }
    const double pi2 = std::numbers::pi * std::numbers::pi;
    // log(t^(d/2+2) pi^2 / (3 delta)) expanded to avoid overflow for large t.
    const double log_term = (0.5 * d + 2.0) * std::log(static_cast<double>(t)) + std::log(pi2 / (3.0 * delta));
    return nu * 2.0 * log_term;
}

double gp_ucb_value(const PosteriorGaussian& post, double beta_t) {
    require_finite(beta_t, "beta");
    if (beta_t < 0.0) {
        throw InvalidArgument("beta must be non-negative");
    }
    return ucb_value(post, std::sqrt(beta_t));
}

double eipi_value(const PosteriorGaussian& post, const IncumbentContext& ctx, double xi, double lambda) {
    require_finite(lambda, "lambda");
    if (lambda < 0.0) {
        throw InvalidArgument("lambda must be non-negative");
    }
    const double pi = pi_value(post, ctx, xi);
    if (lambda == 0.0) {
        return pi;
    }
    return pi + lambda * ei_value(post, ctx, xi);
}

double acquisition_value(const AcquisitionSpec& spec, const PosteriorGaussian& post,
                         const IncumbentContext& ctx) {
    switch (spec.kind) {
        case AcquisitionKind::PI: return pi_value(post, ctx, spec.xi);
        case AcquisitionKind::EI: return ei_value(post, ctx, spec.xi);
        case AcquisitionKind::UCB: return ucb_value(post, spec.lambda);
        case AcquisitionKind::EIPI: return eipi_value(post, ctx, spec.xi, spec.lambda);
        case AcquisitionKind::GPUCB: {
            const double beta = spec.beta_schedule ? spec.beta_schedule(ctx.t, ctx.d, spec.delta, spec.nu)
                                                   : gp_ucb_beta(ctx.t, ctx.d, spec.delta, spec.nu);
            return gp_ucb_value(post, beta);
        }
        case AcquisitionKind::Thompson:
            throw UnsupportedDispatch("thompson sampling has no pointwise acquisition value");
    }
    throw UnsupportedDispatch("unknown acquisition kind");
}

}  // namespace hedgebo

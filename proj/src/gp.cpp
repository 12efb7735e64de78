#include <hedgebo/gp.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace hedgebo {

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
    if (!v.allFinite()) {
        throw InvalidArgument(std::string(what) + " has non-finite coordinates");
    }
}

void require_dim(const Eigen::VectorXd& v, std::size_t dim, const char* what) {
    if (static_cast<std::size_t>(v.size()) != dim) {
        std::ostringstream msg;
        msg << what << " has dimension " << v.size() << ", expected " << dim;
        throw InvalidArgument(msg.str());
    }
}

// Squared scaled distance sum_k ((a_k - b_k) / theta_k)^2.
template <typename A, typename B>
double scaled_sqdist(const A& a, const B& b, const Eigen::VectorXd& theta) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        const double r = (a[k] - b[k]) / theta[k];
        acc += r * r;
    }
    return acc;
}

Eigen::MatrixXd gram_from_inputs(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& theta) {
    const Eigen::Index n = inputs.cols();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        k(j, j) = 1.0;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v = std::exp(-0.5 * scaled_sqdist(inputs.col(i), inputs.col(j), theta));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

struct Evidence {
    double log_likelihood;
    double jitter;
};

Evidence evidence_from_gram(Eigen::MatrixXd gram, const Eigen::VectorXd& y, double noise) {
    gram.diagonal().array() += noise;
    const JitteredCholesky chol = cholesky_with_jitter(gram);
    const auto lower = chol.lower.triangularView<Eigen::Lower>();
    const Eigen::VectorXd w = lower.solve(y);
    const double n = static_cast<double>(y.size());
    const double log_det_half = chol.lower.diagonal().array().log().sum();
    return {-0.5 * w.squaredNorm() - log_det_half - 0.5 * n * std::log(2.0 * std::numbers::pi),
            chol.jitter};
}

}  // namespace

BoxDomain::BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() == 0) {
        throw InvalidArgument("box domain needs at least one dimension");
    }
    require_dim(upper_, dim(), "upper bound");
    require_finite(lower_, "lower bound");
    require_finite(upper_, "upper bound");
    if (!(lower_.array() < upper_.array()).all()) {
        throw InvalidArgument("box domain requires lower < upper in every coordinate");
    }
}

bool BoxDomain::contains(const Point& x) const {
    return static_cast<std::size_t>(x.size()) == dim() && (x.array() >= lower_.array()).all() &&
           (x.array() <= upper_.array()).all();
}

Point BoxDomain::clip(Point x) const {
    require_dim(x, dim(), "point");
    return x.cwiseMax(lower_).cwiseMin(upper_);
}

Point BoxDomain::sample_uniform(Rng& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Point x(lower_.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        x[k] = lower_[k] + unit(rng) * (upper_[k] - lower_[k]);
    }
    return x;
}

Eigen::MatrixXd BoxDomain::latin_hypercube(std::size_t n, Rng& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto cols = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd design(lower_.size(), cols);
    std::vector<Eigen::Index> strata(n);
    for (Eigen::Index k = 0; k < lower_.size(); ++k) {
        std::iota(strata.begin(), strata.end(), Eigen::Index{0});
        std::shuffle(strata.begin(), strata.end(), rng);
        for (Eigen::Index i = 0; i < cols; ++i) {
            const double u = (static_cast<double>(strata[i]) + unit(rng)) / static_cast<double>(n);
            design(k, i) = lower_[k] + u * (upper_[k] - lower_[k]);
        }
    }
    return design;
}

void Dataset::add(Point x, double y) {
    if (dim_ == 0) {
        if (x.size() == 0) {
            throw InvalidArgument("observation point is empty");
        }
        dim_ = static_cast<std::size_t>(x.size());
    }
    require_dim(x, dim_, "observation point");
    require_finite(x, "observation point");
    if (!std::isfinite(y)) {
        throw InvalidArgument("observation value is not finite");
    }
    observations_.push_back({std::move(x), y});
}

Eigen::VectorXd Dataset::ys() const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) {
        y[static_cast<Eigen::Index>(i)] = observations_[i].y;
    }
    return y;
}

Eigen::MatrixXd Dataset::xs() const {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) {
        x.col(static_cast<Eigen::Index>(i)) = observations_[i].x;
    }
    return x;
}

double Dataset::best_value() const {
    if (empty()) {
        throw InvalidArgument("best value of an empty dataset");
    }
    double best = observations_.front().y;
    for (const auto& obs : observations_) {
        best = std::max(best, obs.y);
    }
    return best;
}

bool operator==(const Dataset& a, const Dataset& b) {
    if (a.dim_ != b.dim_ || a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].y != b[i].y || a[i].x != b[i].x) {
            return false;
        }
    }
    return true;
}

void KernelParams::validate(std::size_t dim) const {
    require_dim(theta, dim, "length-scale vector");
    if (!theta.allFinite() || (theta.array() <= 0.0).any()) {
        throw InvalidArgument("length scales must be finite and positive");
    }
    if (!std::isfinite(noise_variance) || noise_variance < 0.0) {
        throw InvalidArgument("noise variance must be finite and non-negative");
    }
}

OutputScaling OutputScaling::standardizing(const Dataset& data) {
    OutputScaling s;
    if (data.empty()) {
        return s;
    }
    const Eigen::VectorXd y = data.ys();
    s.shift = y.mean();
    if (y.size() >= 2) {
        const double var = (y.array() - s.shift).square().sum() / static_cast<double>(y.size() - 1);
        const double sd = std::sqrt(var);
        if (sd > 1e-12) {
            s.scale = sd;
        }
    }
    return s;
}

Dataset rescaled(const Dataset& data, const OutputScaling& scaling) {
    Dataset out(data.dim());
    for (const auto& obs : data) {
        out.add(obs.x, scaling.apply(obs.y));
    }
    return out;
}

JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& symmetric) {
    // Powers of ten from kInitialJitter up to kMaxJitter.
    double jitter = kInitialJitter;
    for (int exponent = -10; exponent <= -4; ++exponent) {
        jitter = std::pow(10.0, exponent);
        Eigen::MatrixXd a = symmetric;
        a.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success) {
            return {llt.matrixL(), jitter};
        }
    }
    std::ostringstream msg;
    msg << "matrix is not positive definite even with jitter " << jitter;
    throw NumericalFailure(msg.str());
}

double kernel_eval(const Point& xi, const Point& xj, const KernelParams& params) {
    const auto dim = static_cast<std::size_t>(params.theta.size());
    require_dim(xi, dim, "first kernel argument");
    require_dim(xj, dim, "second kernel argument");
    return std::exp(-0.5 * scaled_sqdist(xi, xj, params.theta));
}

Eigen::MatrixXd gram_matrix(const Dataset& data, const KernelParams& params) {
    if (!data.empty()) {
        params.validate(data.dim());
    }
    return gram_from_inputs(data.xs(), params.theta);
}

GpModel build_model(Dataset dataset, KernelParams params) {
    if (params.theta.size() == 0) {
        throw InvalidArgument("kernel parameters have no length scales");
    }
    const auto dim = static_cast<std::size_t>(params.theta.size());
    params.validate(dim);
    if (!dataset.empty() && dataset.dim() != dim) {
        throw InvalidArgument("dataset dimension does not match kernel parameters");
    }

    GpModel model;
    model.inputs_ = dataset.xs();
    if (!dataset.empty()) {
        Eigen::MatrixXd gram = gram_from_inputs(model.inputs_, params.theta);
        gram.diagonal().array() += params.noise_variance;
        JitteredCholesky chol = cholesky_with_jitter(gram);
        const Eigen::VectorXd w = chol.lower.triangularView<Eigen::Lower>().solve(dataset.ys());
        model.alpha_ = chol.lower.transpose().triangularView<Eigen::Upper>().solve(w);
        model.factor_ = std::move(chol.lower);
        model.jitter_ = chol.jitter;
    }
    model.dataset_ = std::move(dataset);
    model.params_ = std::move(params);
    return model;
}

Eigen::MatrixXd cross_covariance(const GpModel& model, const Eigen::MatrixXd& points) {
    const Eigen::MatrixXd& inputs = model.inputs();
    const Eigen::VectorXd& theta = model.params().theta;
    Eigen::MatrixXd k(inputs.cols(), points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
        for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
            k(i, j) = std::exp(-0.5 * scaled_sqdist(inputs.col(i), points.col(j), theta));
        }
    }
    return k;
}

PosteriorBatch predict_batch(const GpModel& model, const Eigen::MatrixXd& points) {
    if (static_cast<std::size_t>(points.rows()) != model.dim()) {
        std::ostringstream msg;
        msg << "query points have dimension " << points.rows() << ", model has " << model.dim();
        throw InvalidArgument(msg.str());
    }
    if (!points.allFinite()) {
        throw InvalidArgument("query points have non-finite coordinates");
    }

    PosteriorBatch out;
    const Eigen::Index m = points.cols();
    if (model.dataset().empty()) {
        out.mean = Eigen::VectorXd::Zero(m);
        out.variance = Eigen::VectorXd::Ones(m);
        return out;
    }

    Eigen::MatrixXd kstar = cross_covariance(model, points);
    out.mean = kstar.transpose() * model.alpha();
    model.factor().triangularView<Eigen::Lower>().solveInPlace(kstar);
    out.variance = Eigen::VectorXd(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double v = 1.0 - kstar.col(j).squaredNorm();
        if (v < kNegativeVarianceTolerance) {
            std::ostringstream msg;
            msg << "predictive variance " << v << " is negative beyond round-off";
            throw NumericalFailure(msg.str());
        }
        out.variance[j] = std::max(v, 0.0);
    }
    return out;
}

PosteriorGaussian predict(const GpModel& model, const Point& xstar) {
    require_dim(xstar, model.dim(), "query point");
    const PosteriorBatch batch = predict_batch(model, xstar);
    return {batch.mean[0], batch.variance[0]};
}

Eigen::VectorXd sample_posterior(const GpModel& model, const Eigen::MatrixXd& candidates, Rng& rng) {
    if (candidates.cols() == 0) {
        throw InvalidArgument("posterior sample needs at least one candidate");
    }
    if (static_cast<std::size_t>(candidates.rows()) != model.dim()) {
        throw InvalidArgument("candidate dimension does not match the model");
    }
    if (!candidates.allFinite()) {
        throw InvalidArgument("candidates have non-finite coordinates");
    }

    const Eigen::Index m = candidates.cols();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd cov = gram_from_inputs(candidates, model.params().theta);
    if (!model.dataset().empty()) {
        Eigen::MatrixXd kstar = cross_covariance(model, candidates);
        mean = kstar.transpose() * model.alpha();
        model.factor().triangularView<Eigen::Lower>().solveInPlace(kstar);
        cov.noalias() -= kstar.transpose() * kstar;
        cov = 0.5 * (cov + cov.transpose()).eval();
    }
    const JitteredCholesky chol = cholesky_with_jitter(cov);

    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        z[i] = normal(rng);
    }
    return mean + chol.lower.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd sample_posterior(const GpModel& model, std::span<const Point> candidates, Rng& rng) {
    Eigen::MatrixXd cols(static_cast<Eigen::Index>(model.dim()),
                         static_cast<Eigen::Index>(candidates.size()));
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        require_dim(candidates[j], model.dim(), "candidate");
        cols.col(static_cast<Eigen::Index>(j)) = candidates[j];
    }
    return sample_posterior(model, cols, rng);
}

double log_marginal_likelihood(const Dataset& data, const KernelParams& params) {
    if (data.empty()) {
        throw InvalidArgument("log marginal likelihood of an empty dataset");
    }
    params.validate(data.dim());
    return evidence_from_gram(gram_from_inputs(data.xs(), params.theta), data.ys(),
                              params.noise_variance)
        .log_likelihood;
}

std::vector<Interval> default_theta_bounds(const BoxDomain& domain) {
    std::vector<Interval> bounds;
    const Eigen::VectorXd ranges = domain.ranges();
    for (Eigen::Index k = 0; k < ranges.size(); ++k) {
        bounds.push_back({1e-2 * ranges[k], 10.0 * ranges[k]});
    }
    return bounds;
}

namespace {

// Per-dimension squared differences are fixed for a dataset; only theta varies
// during fitting.
class EvidenceSurface {
public:
    EvidenceSurface(const Dataset& data, std::size_t dim, bool fit_noise, double fixed_noise)
        : y_(data.ys()), dim_(static_cast<Eigen::Index>(dim)), fit_noise_(fit_noise), fixed_noise_(fixed_noise) {
        const Eigen::MatrixXd x = data.xs();
        const Eigen::Index n = x.cols();
        // Strict lower triangle, column by column.
        pair_sqdiff_.resize(n * (n - 1) / 2, dim_);
        Eigen::Index row = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = j + 1; i < n; ++i, ++row) {
                pair_sqdiff_.row(row) = (x.col(i) - x.col(j)).array().square().transpose();
            }
        }
    }

    KernelParams params_at(const Eigen::VectorXd& log_params) const {
        KernelParams p;
        p.theta = log_params.head(dim_).array().exp();
        p.noise_variance = fit_noise_ ? std::exp(log_params[dim_]) : fixed_noise_;
        return p;
    }

    // -inf marks a failed factorization.
    double operator()(const Eigen::VectorXd& log_params) const {
        const KernelParams p = params_at(log_params);
        const Eigen::Index n = y_.size();
        const Eigen::VectorXd inv_sq = p.theta.array().square().inverse().matrix();
        const Eigen::VectorXd k = (-0.5 * (pair_sqdiff_ * inv_sq).array()).exp().matrix();

        Eigen::MatrixXd gram(n, n);
        Eigen::Index row = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            gram(j, j) = 1.0;
            const Eigen::Index len = n - j - 1;
            gram.col(j).tail(len) = k.segment(row, len);
            row += len;
        }

        gram.diagonal().array() += p.noise_variance + kInitialJitter;
        Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(gram);
        if (llt.info() == Eigen::Success) {
            const Eigen::VectorXd w = llt.matrixL().solve(y_);
            const double log_det_half = gram.diagonal().array().log().sum();
            return -0.5 * w.squaredNorm() - log_det_half - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
        }

        // Rebuild and retry with the full jitter ladder.
        Eigen::MatrixXd full = Eigen::MatrixXd::Identity(n, n);
        row = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = j + 1; i < n; ++i, ++row) {
                full(i, j) = k[row];
                full(j, i) = k[row];
            }
        }
        try {
            return evidence_from_gram(std::move(full), y_, p.noise_variance).log_likelihood;
        } catch (const NumericalFailure&) {
            return -std::numeric_limits<double>::infinity();
        }
    }

private:
    Eigen::VectorXd y_;
    Eigen::Index dim_;
    Eigen::MatrixXd pair_sqdiff_;
    bool fit_noise_;
    double fixed_noise_;
};

struct Candidate {
    Eigen::VectorXd log_params;
    double value;
};

// Maximizes along one coordinate; only moves when the line search finds a
// strictly better value.
void golden_refine(const EvidenceSurface& surface, Candidate& current, Eigen::Index coord,
                   double lo, double hi, int iterations) {
    if (!(hi > lo)) {
        return;
    }
    constexpr double inv_phi = 0.6180339887498949;
    auto eval_at = [&](double s) {
        Eigen::VectorXd u = current.log_params;
        u[coord] = s;
        return surface(u);
    };
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eval_at(c);
    double fd = eval_at(d);
    double best_s = fc >= fd ? c : d;
    double best_f = std::max(fc, fd);
    for (int it = 0; it < iterations; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval_at(c);
            if (fc > best_f) {
                best_f = fc;
                best_s = c;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval_at(d);
            if (fd > best_f) {
                best_f = fd;
                best_s = d;
            }
        }
    }
    if (best_f > current.value) {
        current.log_params[coord] = best_s;
        current.value = best_f;
    }
}

}  // namespace

FitResult fit_hyperparams_traced(const Dataset& data, std::span<const Interval> theta_bounds,
                                 Interval noise_bounds, Rng& rng, const FitOptions& options) {
    if (data.size() < 2) {
        throw InvalidArgument("hyperparameter fitting needs at least two observations");
    }
    const std::size_t dim = data.dim();
    if (theta_bounds.size() != dim) {
        throw InvalidArgument("one length-scale interval per dimension is required");
    }
    for (const auto& b : theta_bounds) {
        if (!(b.lo > 0.0) || !(b.hi >= b.lo) || !std::isfinite(b.hi)) {
            throw InvalidArgument("length-scale bounds must satisfy 0 < lo <= hi < inf");
        }
    }
    if (!(noise_bounds.lo >= 0.0) || !(noise_bounds.hi >= noise_bounds.lo) || !std::isfinite(noise_bounds.hi)) {
        throw InvalidArgument("noise bounds must satisfy 0 <= lo <= hi < inf");
    }
    const bool fit_noise = noise_bounds.hi > noise_bounds.lo;
    if (fit_noise && noise_bounds.lo <= 0.0) {
        throw InvalidArgument("a fitted noise interval must have a positive lower bound");
    }
    if (options.starts < 1 || options.passes < 0 || options.golden_iterations < 0) {
        throw InvalidArgument("fit options out of range");
    }

    const auto n_params = static_cast<Eigen::Index>(dim + (fit_noise ? 1 : 0));
    Eigen::VectorXd lo(n_params);
    Eigen::VectorXd hi(n_params);
    for (std::size_t k = 0; k < dim; ++k) {
        lo[static_cast<Eigen::Index>(k)] = std::log(theta_bounds[k].lo);
        hi[static_cast<Eigen::Index>(k)] = std::log(theta_bounds[k].hi);
    }
    if (fit_noise) {
        lo[n_params - 1] = std::log(noise_bounds.lo);
        hi[n_params - 1] = std::log(noise_bounds.hi);
    }

    const EvidenceSurface surface(data, dim, fit_noise, noise_bounds.lo);

    std::vector<Eigen::VectorXd> starts;
    if (options.warm_start) {
        const KernelParams& w = *options.warm_start;
        w.validate(dim);
        Eigen::VectorXd u(n_params);
        u.head(static_cast<Eigen::Index>(dim)) = w.theta.array().log();
        if (fit_noise) {
            u[n_params - 1] = std::log(std::max(w.noise_variance, noise_bounds.lo));
        }
        starts.push_back(u.cwiseMax(lo).cwiseMin(hi));
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int s = 0; s < options.starts; ++s) {
        Eigen::VectorXd u(n_params);
        for (Eigen::Index k = 0; k < n_params; ++k) {
            u[k] = lo[k] + unit(rng) * (hi[k] - lo[k]);
        }
        starts.push_back(std::move(u));
    }

    FitResult result;
    std::optional<Candidate> best;
    for (const auto& u : starts) {
        Candidate cand{u, surface(u)};
        result.start_log_likelihoods.push_back(std::isfinite(cand.value)
                                                   ? cand.value
                                                   : std::numeric_limits<double>::quiet_NaN());
        if (!std::isfinite(cand.value)) {
            continue;
        }
        for (int pass = 0; pass < options.passes; ++pass) {
            for (Eigen::Index k = 0; k < n_params; ++k) {
                golden_refine(surface, cand, k, lo[k], hi[k], options.golden_iterations);
            }
        }
        if (!best || cand.value > best->value) {
            best = std::move(cand);
        }
    }
    if (!best) {
        throw NumericalFailure("every hyperparameter start failed to factorize");
    }
    result.params = surface.params_at(best->log_params);
    result.log_likelihood = best->value;
    return result;
}

KernelParams fit_hyperparams(const Dataset& data, std::span<const Interval> theta_bounds,
                             Interval noise_bounds, Rng& rng, const FitOptions& options) {
    return fit_hyperparams_traced(data, theta_bounds, noise_bounds, rng, options).params;
}

}  // namespace hedgebo

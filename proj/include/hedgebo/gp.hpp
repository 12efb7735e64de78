#pragma once

// Gaussian-process surrogate with a unit-amplitude ARD squared-exponential
// kernel and a zero prior mean.

#include <hedgebo/errors.hpp>

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace hedgebo {

using Point = Eigen::VectorXd;
using Rng = std::mt19937_64;

/// Axis-aligned search box. Every coordinate must satisfy lower < upper.
class BoxDomain {
public:
    BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper);

    std::size_t dim() const { return static_cast<std::size_t>(lower_.size()); }
    const Eigen::VectorXd& lower() const { return lower_; }
    const Eigen::VectorXd& upper() const { return upper_; }
    Eigen::VectorXd ranges() const { return upper_ - lower_; }

    bool contains(const Point& x) const;
    Point clip(Point x) const;

    /// Draws d uniforms in coordinate order.
    Point sample_uniform(Rng& rng) const;

    /// Latin-hypercube design of n points; each point is one column.
    Eigen::MatrixXd latin_hypercube(std::size_t n, Rng& rng) const;

private:
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
};

struct Observation {
    Point x;
    double y = 0.0;
};

/// Observations in insertion order. Index 0 is the first sample of a run.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::size_t dim) : dim_(dim) {}

    void add(Point x, double y);

    std::size_t size() const { return observations_.size(); }
    bool empty() const { return observations_.empty(); }
    /// 0 while the dataset is empty and was constructed without a dimension.
    std::size_t dim() const { return dim_; }

    const Observation& operator[](std::size_t i) const { return observations_[i]; }
    auto begin() const { return observations_.begin(); }
    auto end() const { return observations_.end(); }

    Eigen::VectorXd ys() const;
    /// Inputs as columns of a d x n matrix.
    Eigen::MatrixXd xs() const;
    double best_value() const;

    friend bool operator==(const Dataset& a, const Dataset& b);

private:
    std::size_t dim_ = 0;
    std::vector<Observation> observations_;
};

struct KernelParams {
    Eigen::VectorXd theta;  ///< ARD length scales, all > 0
    double noise_variance = 1e-6;

    void validate(std::size_t dim) const;
};

/// Affine map applied to objective values before they reach the GP.
struct OutputScaling {
    double shift = 0.0;
    double scale = 1.0;

    double apply(double y) const { return (y - shift) / scale; }

    /// Sample mean and standard deviation of the dataset's values; the scale
    /// falls back to 1 for fewer than two distinct values.
    static OutputScaling standardizing(const Dataset& data);
};

Dataset rescaled(const Dataset& data, const OutputScaling& scaling);

struct PosteriorGaussian {
    double mean = 0.0;
    double variance = 1.0;
};

struct PosteriorBatch {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

inline constexpr double kInitialJitter = 1e-10;
inline constexpr double kMaxJitter = 1e-4;
/// Predictive variances below this are a numerical failure rather than round-off.
inline constexpr double kNegativeVarianceTolerance = -1e-6;

/// Lower Cholesky factor of a symmetric matrix plus the diagonal jitter that
/// made it succeed. Tries 1e-10, 1e-9, ... 1e-4.
struct JitteredCholesky {
    Eigen::MatrixXd lower;
    double jitter = 0.0;
};

JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& symmetric);

/// Immutable fitted GP. Safe to share between concurrent readers.
class GpModel {
public:
    const Dataset& dataset() const { return dataset_; }
    const KernelParams& params() const { return params_; }
    std::size_t dim() const { return static_cast<std::size_t>(params_.theta.size()); }

    /// L with L L^T = K + (noise + jitter) I. Empty for the prior model.
    const Eigen::MatrixXd& factor() const { return factor_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    double jitter() const { return jitter_; }
    /// Training inputs as columns (d x n).
    const Eigen::MatrixXd& inputs() const { return inputs_; }

private:
    friend GpModel build_model(Dataset dataset, KernelParams params);

    Dataset dataset_;
    KernelParams params_;
    Eigen::MatrixXd inputs_;
    Eigen::MatrixXd factor_;
    Eigen::VectorXd alpha_;
    double jitter_ = 0.0;
};

double kernel_eval(const Point& xi, const Point& xj, const KernelParams& params);

Eigen::MatrixXd gram_matrix(const Dataset& data, const KernelParams& params);

/// Factorizes once; an empty dataset yields the zero-mean prior.
GpModel build_model(Dataset dataset, KernelParams params);

PosteriorGaussian predict(const GpModel& model, const Point& xstar);

/// Predicts every column of `points` (d x m); agrees with predict() to round-off.
PosteriorBatch predict_batch(const GpModel& model, const Eigen::MatrixXd& points);

/// k(x_i, c_j) for training inputs x_i and candidate columns c_j (n x m).
Eigen::MatrixXd cross_covariance(const GpModel& model, const Eigen::MatrixXd& points);

/// One joint draw from the posterior over the candidate columns (d x m).
Eigen::VectorXd sample_posterior(const GpModel& model, const Eigen::MatrixXd& candidates, Rng& rng);
Eigen::VectorXd sample_posterior(const GpModel& model, std::span<const Point> candidates, Rng& rng);

double log_marginal_likelihood(const Dataset& data, const KernelParams& params);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// [1e-2 * range, 10 * range] per dimension.
std::vector<Interval> default_theta_bounds(const BoxDomain& domain);

struct FitOptions {
    int starts = 64;
    int passes = 1;
    int golden_iterations = 8;
    /// Evaluated and refined alongside the random starts.
    std::optional<KernelParams> warm_start;
};

struct FitResult {
    KernelParams params;
    double log_likelihood = 0.0;
    /// Log evidence of each raw start; NaN where factorization failed.
    std::vector<double> start_log_likelihoods;
};

/// Multi-start random search in log space, each start refined by coordinate-wise
/// golden-section passes. A degenerate noise interval (lo == hi) keeps the noise
/// fixed; otherwise lo must be positive.
FitResult fit_hyperparams_traced(const Dataset& data, std::span<const Interval> theta_bounds,
                                 Interval noise_bounds, Rng& rng, const FitOptions& options = {});

KernelParams fit_hyperparams(const Dataset& data, std::span<const Interval> theta_bounds,
                             Interval noise_bounds, Rng& rng, const FitOptions& options = {});

}  // namespace hedgebo

#include <hedgebo/testbed.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hedgebo {

namespace {

void check_box(const Point& p, const BoxDomain& box, const char* name) {
    if (static_cast<std::size_t>(p.size()) != box.dim()) {
        std::ostringstream msg;
        msg << name << " expects dimension " << box.dim() << ", got " << p.size();
        throw InvalidArgument(msg.str());
    }
    if (!box.contains(p)) {
        std::ostringstream msg;
        msg << name << " evaluated outside its domain at (" << p.transpose() << ")";
        throw DomainError(msg.str());
    }
}

const BoxDomain& branin_box() {
    static const BoxDomain box(Eigen::Vector2d(-5.0, 0.0), Eigen::Vector2d(10.0, 15.0));
    return box;
}

const BoxDomain& unit_box(int dim) {
    static const BoxDomain box3(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3));
    static const BoxDomain box6(Eigen::VectorXd::Zero(6), Eigen::VectorXd::Ones(6));
    return dim == 3 ? box3 : box6;
}

constexpr std::array<double, 4> kHartmannAlpha{1.0, 1.2, 3.0, 3.2};

constexpr double kHartmann3A[4][3] = {
    {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
constexpr double kHartmann3P[4][3] = {
    {0.3689, 0.1170, 0.2673}, {0.4699, 0.4387, 0.7470}, {0.1091, 0.8732, 0.5547}, {0.0381, 0.5743, 0.8828}};

constexpr double kHartmann6A[4][6] = {{10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
                                      {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
                                      {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
                                      {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}};
constexpr double kHartmann6P[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                      {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                      {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                      {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};

template <int D>
double hartmann(const Point& p, const double (&a)[4][D], const double (&pm)[4][D]) {
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (int j = 0; j < D; ++j) {
            const double r = p[j] - pm[i][j];
            inner += a[i][j] * r * r;
        }
        sum += kHartmannAlpha[static_cast<std::size_t>(i)] * std::exp(-inner);
    }
    return sum;
}

// Coordinate pattern search maximizing fn from x, halving the step until it
// falls below 1e-8 of the range.
struct LocalResult {
    Point x;
    double value;
};

LocalResult pattern_search(const TestFunction& fn, Point x, long& evaluations, double& max_seen) {
    const Eigen::VectorXd ranges = fn.domain.ranges();
    double fx = fn.evaluate(x);
    ++evaluations;
    max_seen = std::max(max_seen, fx);
    double step = 0.1;
    while (step > 1e-8) {
        bool improved = false;
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            for (const double sign : {1.0, -1.0}) {
                Point trial = x;
                trial[k] += sign * step * ranges[k];
                trial = fn.domain.clip(std::move(trial));
                const double ft = fn.evaluate(trial);
                ++evaluations;
                max_seen = std::max(max_seen, ft);
                if (ft > fx) {
                    fx = ft;
                    x = std::move(trial);
                    improved = true;
                }
            }
        }
        if (!improved) {
            step *= 0.5;
        }
    }
    return {std::move(x), fx};
}

}  // namespace

double branin(const Point& p) {
    check_box(p, branin_box(), "branin");
    constexpr double pi = std::numbers::pi;
    const double b = 5.1 / (4.0 * pi * pi);
    const double c = 5.0 / pi;
    const double t = 1.0 / (8.0 * pi);
    const double x1 = p[0];
    const double x2 = p[1];
    const double q = x2 - b * x1 * x1 + c * x1 - 6.0;
    return -(q * q + 10.0 * (1.0 - t) * std::cos(x1) + 10.0);
}

double hartmann3(const Point& p) {
    check_box(p, unit_box(3), "hartmann3");
    return hartmann<3>(p, kHartmann3A, kHartmann3P);
}

double hartmann6(const Point& p) {
    check_box(p, unit_box(6), "hartmann6");
    return hartmann<6>(p, kHartmann6A, kHartmann6P);
}

TestFunction make_branin() {
    return TestFunction{"branin",
                        2,
                        branin_box(),
                        branin,
                        -0.39788735772973816,
                        {Eigen::Vector2d(-std::numbers::pi, 12.275), Eigen::Vector2d(std::numbers::pi, 2.275),
                         Eigen::Vector2d(9.42477796076938, 2.475)}};
}

TestFunction make_hartmann3() {
    Point opt(3);
    opt << 0.11458888122541287, 0.5556488954739371, 0.8525469842172746;
    return TestFunction{"hartmann3", 3, unit_box(3), hartmann3, 3.862779787332663, {opt}};
}

TestFunction make_hartmann6() {
    Point opt(6);
    opt << 0.20168950909365746, 0.15001069354111374, 0.4768739729250998, 0.2753324275220782,
        0.3116516172395686, 0.6573005345536702;
    return TestFunction{"hartmann6", 6, unit_box(6), hartmann6, 3.3223680114155147, {opt}};
}

SelfCheckReport self_check(const TestFunction& fn, const SelfCheckOptions& options) {
    if (fn.dimension != fn.domain.dim() || !fn.evaluate) {
        throw SelfCheckError(fn.name + ": malformed test function");
    }
    for (const auto& x : fn.known_opt_points) {
        if (!fn.domain.contains(x)) {
            throw SelfCheckError(fn.name + ": known optimizer lies outside the domain");
        }
        const double v = fn.evaluate(x);
        if (std::abs(v - fn.known_opt_value) > 1e-6) {
            std::ostringstream msg;
            msg.precision(12);
            msg << fn.name << ": known optimizer evaluates to " << v << ", registered optimum is "
                << fn.known_opt_value;
            throw SelfCheckError(msg.str());
        }
    }

    SelfCheckReport report;
    report.oracle_best = -std::numeric_limits<double>::infinity();
    double max_seen = -std::numeric_limits<double>::infinity();
    const auto dim = static_cast<Eigen::Index>(fn.dimension);
    const Eigen::VectorXd lo = fn.domain.lower();
    const Eigen::VectorXd ranges = fn.domain.ranges();

    if (fn.dimension <= 2) {
        const int g = options.grid_points_per_dim;
        if (g < 2) {
            throw InvalidArgument("self-check grid needs at least two points per dimension");
        }
        long total = 1;
        for (Eigen::Index k = 0; k < dim; ++k) {
            total *= g;
        }
        Point x(dim);
        for (long idx = 0; idx < total; ++idx) {
            long rest = idx;
            for (Eigen::Index k = 0; k < dim; ++k) {
                x[k] = lo[k] + ranges[k] * static_cast<double>(rest % g) / (g - 1);
                rest /= g;
            }
            const double v = fn.evaluate(x);
            ++report.evaluations;
            max_seen = std::max(max_seen, v);
            if (v > report.oracle_best) {
                report.oracle_best = v;
                report.oracle_argmax = x;
            }
        }
        // Polish the best grid node so the grid spacing does not bound the accuracy.
        LocalResult polished = pattern_search(fn, report.oracle_argmax, report.evaluations, max_seen);
        if (polished.value > report.oracle_best) {
            report.oracle_best = polished.value;
            report.oracle_argmax = std::move(polished.x);
        }
    } else {
        if (options.local_starts < 1) {
            throw InvalidArgument("self-check needs at least one local-search start");
        }
        Rng rng(options.seed);
        for (int s = 0; s < options.local_starts; ++s) {
            LocalResult r = pattern_search(fn, fn.domain.sample_uniform(rng), report.evaluations, max_seen);
            if (r.value > report.oracle_best) {
                report.oracle_best = r.value;
                report.oracle_argmax = std::move(r.x);
            }
        }
    }

    std::ostringstream msg;
    msg.precision(12);
    if (max_seen > fn.known_opt_value + 1e-9) {
        msg << fn.name << ": oracle found value " << max_seen << " above registered optimum "
            << fn.known_opt_value;
        throw SelfCheckError(msg.str());
    }
    if (std::abs(report.oracle_best - fn.known_opt_value) > 1e-4) {
        msg << fn.name << ": oracle best " << report.oracle_best << " disagrees with registered optimum "
            << fn.known_opt_value;
        throw SelfCheckError(msg.str());
    }
    return report;
}

const SelfCheckReport& TestFunctionRegistry::add(TestFunction fn) {
    SelfCheckReport report = self_check(fn, options_);
    std::string name = fn.name;
    auto [it, inserted] = entries_.insert_or_assign(name, Entry{std::move(fn), std::move(report)});
    return it->second.report;
}

const TestFunction& TestFunctionRegistry::find(const std::string& name) const {
    const auto it = entries_.find(name);
    if (it == entries_.end()) {
        throw InvalidArgument("unknown test function: " + name);
    }
    return it->second.fn;
}

const SelfCheckReport& TestFunctionRegistry::report(const std::string& name) const {
    const auto it = entries_.find(name);
    if (it == entries_.end()) {
        throw InvalidArgument("unknown test function: " + name);
    }
    return it->second.report;
}

std::vector<std::string> TestFunctionRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, entry] : entries_) {
        out.push_back(name);
    }
    return out;
}

const TestFunctionRegistry& default_registry() {
    static const TestFunctionRegistry registry = [] {
        TestFunctionRegistry r;
        r.add(make_branin());
        r.add(make_hartmann3());
        r.add(make_hartmann6());
        return r;
    }();
    return registry;
}

double gap_metric(double f_best_t, double f_first, double f_opt) {
    if (!std::isfinite(f_best_t) || !std::isfinite(f_first) || !std::isfinite(f_opt)) {
        throw InvalidArgument("gap metric arguments must be finite");
    }
    if (!(f_opt > f_first)) {
        throw DegenerateStart("gap metric undefined: first sample already attains the optimum");
    }
    if (f_best_t < f_first) {
        throw InvalidArgument("incumbent is worse than the first sample");
    }
    if (f_best_t > f_opt + 1e-9 * std::max(1.0, std::abs(f_opt))) {
        throw InvalidArgument("incumbent exceeds the known optimum");
    }
    const double g = (f_best_t - f_first) / (f_opt - f_first);
    return std::clamp(g, 0.0, 1.0);
}

std::vector<double> gap_trace(const Dataset& data, double f_opt) {
    std::vector<double> trace;
    if (data.empty()) {
        return trace;
    }
    const double first = data[0].y;
    double best = first;
    trace.reserve(data.size());
    for (const auto& obs : data) {
        best = std::max(best, obs.y);
        trace.push_back(gap_metric(best, first, f_opt));
    }
    return trace;
}

RegretTrace regret_traces(const Dataset& data, double f_opt) {
    RegretTrace out;
    double running = 0.0;
    for (const auto& obs : data) {
        const double r = std::max(0.0, f_opt - obs.y);
        running += r;
        out.instantaneous.push_back(r);
        out.cumulative.push_back(running);
    }
    return out;
}

}  // namespace hedgebo

#pragma once

// Benchmark objectives in maximization form (standard minimization
// benchmarks negated), the gap metric, and regret traces.

#include <hedgebo/gp.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace hedgebo {

/// Negated Branin on [-5, 10] x [0, 15]. Maximum -0.397887 at three points.
double branin(const Point& p);

/// Negated Hartmann-3 on [0, 1]^3. Maximum 3.862780.
double hartmann3(const Point& p);

/// Negated Hartmann-6 on [0, 1]^6. Maximum 3.322368.
double hartmann6(const Point& p);

struct TestFunction {
    std::string name;
    std::size_t dimension = 0;
    BoxDomain domain;
    std::function<double(const Point&)> evaluate;
    double known_opt_value = 0.0;
    std::vector<Point> known_opt_points;
};

TestFunction make_branin();
TestFunction make_hartmann3();
TestFunction make_hartmann6();

struct SelfCheckOptions {
    int grid_points_per_dim = 1001;  ///< dense grid for d <= 2
    int local_starts = 10000;        ///< multi-start local search for d > 2
    std::uint64_t seed = 20240101;
};

struct SelfCheckReport {
    double oracle_best = 0.0;  ///< best value found by the brute-force oracle
    Point oracle_argmax;
    long evaluations = 0;
};

/// Confirms the registered optimum with a brute-force oracle: the oracle's best
/// must be within 1e-4 of known_opt_value and never exceed it by more than
/// 1e-9, and every known optimizer must lie in the domain and evaluate to
/// known_opt_value within 1e-6. Throws SelfCheckError otherwise.
SelfCheckReport self_check(const TestFunction& fn, const SelfCheckOptions& options = {});

/// Name-keyed set of test functions that passed their self-check.
class TestFunctionRegistry {
public:
    explicit TestFunctionRegistry(SelfCheckOptions options = {}) : options_(options) {}

    /// Runs self_check() first; a failing function is not registered.
    const SelfCheckReport& add(TestFunction fn);

    bool contains(const std::string& name) const { return entries_.count(name) != 0; }
    const TestFunction& find(const std::string& name) const;
    const SelfCheckReport& report(const std::string& name) const;
    std::vector<std::string> names() const;

private:
    struct Entry {
        TestFunction fn;
        SelfCheckReport report;
    };
    SelfCheckOptions options_;
    std::map<std::string, Entry> entries_;
};

/// branin, hartmann3 and hartmann6, self-checked on first use.
const TestFunctionRegistry& default_registry();

/// [f(x+) - f(x1)] / [f(x*) - f(x1)], clamped to [0, 1].
double gap_metric(double f_best_t, double f_first, double f_opt);

/// Gap after each observation in evaluation order; the first entry is 0.
std::vector<double> gap_trace(const Dataset& data, double f_opt);

struct RegretTrace {
    std::vector<double> instantaneous;  ///< max(0, f_opt - y_t)
    std::vector<double> cumulative;
};

RegretTrace regret_traces(const Dataset& data, double f_opt);

}  // namespace hedgebo

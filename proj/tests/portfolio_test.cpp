#include <hedgebo/portfolio.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

using namespace hedgebo;

namespace {

std::vector<double> naive_softmax(const std::vector<double>& g, double eta) {
    std::vector<double> p;
    double total = 0.0;
    for (double v : g) total += std::exp(eta * v);
    for (double v : g) p.push_back(std::exp(eta * v) / total);
    return p;
}

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

double bowl(const Point& x) {
    return -(std::pow(x[0] - 0.3, 2) + std::pow(x[1] - 0.7, 2));
}

BoxDomain unit_square() {
    return BoxDomain(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
}

ProposalBudget small_budget() {
    ProposalBudget b;
    b.n_candidates = 200;
    b.n_local_steps = 5;
    return b;
}

Dataset seed_data(Rng& rng) {
    const BoxDomain box = unit_square();
    Dataset d(2);
    const Eigen::MatrixXd design = box.latin_hypercube(2, rng);
    for (Eigen::Index j = 0; j < 2; ++j) d.add(design.col(j), bowl(design.col(j)));
    return d;
}

Surrogate fixed_surrogate(const Dataset& d) {
    return {{Eigen::VectorXd::Constant(2, 0.3), 1e-6}, OutputScaling::standardizing(d)};
}

std::vector<AcquisitionSpec> three_arms() {
    return {AcquisitionSpec::ei(0.01), AcquisitionSpec::pi(0.01), AcquisitionSpec::gp_ucb(0.1, 0.2)};
}

}  // namespace

TEST(Hedge, EqualGainsGiveUniform) {
    const std::vector<double> p = hedge_probabilities(std::vector<double>{2.5, 2.5, 2.5, 2.5}, 0.7);
    for (double v : p) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(Hedge, HandExample) {
    const std::vector<double> p = hedge_probabilities(std::vector<double>{1.0, 0.0}, std::numbers::ln2);
    EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-12);
}

TEST(Hedge, MatchesNaiveSoftmaxAndSumsToOne) {
    Rng rng(3);
    std::uniform_real_distribution<double> g(-20.0, 20.0);
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<double> gains(1 + rep % 7);
        for (double& v : gains) v = g(rng);
        const double eta = 0.1 + (rep % 5) * 0.4;
        const std::vector<double> p = hedge_probabilities(gains, eta);
        const std::vector<double> q = naive_softmax(gains, eta);
        EXPECT_NEAR(sum(p), 1.0, 1e-12);
        for (std::size_t i = 0; i < p.size(); ++i) {
            EXPECT_NEAR(p[i], q[i], 1e-12);
            EXPECT_GT(p[i], 0.0);
        }
    }
}

TEST(Hedge, ShiftInvarianceIsExact) {
    const std::vector<double> g{0.3, -1.2, 2.0};
    const std::vector<double> p = hedge_probabilities(g, 1.5);
    for (double c : {-1000.0, -3.0, 0.5, 1e6}) {
        std::vector<double> shifted = g;
        for (double& v : shifted) v += c;
        const std::vector<double> q = hedge_probabilities(shifted, 1.5);
        for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-9);
    }
    // Shifts representable without rounding leave every entry bit-identical.
    std::vector<double> shifted = g;
    for (double& v : shifted) v += 4.0;
    EXPECT_EQ(hedge_probabilities(g, 1.5)[0] > 0.0, true);
    const std::vector<double> q = hedge_probabilities(std::vector<double>{0.25, -1.0, 2.0}, 2.0);
    const std::vector<double> r = hedge_probabilities(std::vector<double>{4.25, 3.0, 6.0}, 2.0);
    EXPECT_EQ(q, r);
}

TEST(Hedge, EtaGainScalingInvariance) {
    const std::vector<double> g{0.5, -0.25, 1.0};
    const std::vector<double> p = hedge_probabilities(g, 1.0);
    std::vector<double> scaled = g;
    for (double& v : scaled) v *= 4.0;
    const std::vector<double> q = hedge_probabilities(scaled, 0.25);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-15);
}

TEST(Hedge, HugeGapsStayPositiveWithoutOverflow) {
    const std::vector<double> p = hedge_probabilities(std::vector<double>{1e6, 0.0}, 1.0);
    EXPECT_EQ(p[0], 1.0);
    EXPECT_GT(p[1], 0.0);
}

TEST(Hedge, Errors) {
    EXPECT_THROW(hedge_probabilities(std::vector<double>{}, 1.0), InvalidArgument);
    EXPECT_THROW(hedge_probabilities(std::vector<double>{0.0, NAN}, 1.0), InvalidArgument);
    EXPECT_THROW(hedge_probabilities(std::vector<double>{0.0}, 0.0), InvalidArgument);
}

TEST(Exp3, MixtureExamples) {
    const std::vector<double> g{1.0, 0.0};
    const std::vector<double> uniform = exp3_probabilities(g, 3.0, 1.0);
    EXPECT_NEAR(uniform[0], 0.5, 1e-15);
    EXPECT_NEAR(uniform[1], 0.5, 1e-15);
    EXPECT_EQ(exp3_probabilities(g, std::numbers::ln2, 0.0), hedge_probabilities(g, std::numbers::ln2));
    const std::vector<double> p = exp3_probabilities(g, std::numbers::ln2, 0.5);
    EXPECT_NEAR(p[0], 0.5 * 2.0 / 3.0 + 0.25, 1e-12);
    EXPECT_NEAR(p[1], 0.5 / 3.0 + 0.25, 1e-12);
    EXPECT_NEAR(p[0], 0.58333, 1e-5);
}

TEST(Exp3, FloorAndSimplex) {
    Rng rng(5);
    std::uniform_real_distribution<double> g(-50.0, 50.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> gains(4);
        for (double& v : gains) v = g(rng);
        const std::vector<double> p = exp3_probabilities(gains, 1.0, 0.2);
        EXPECT_NEAR(sum(p), 1.0, 1e-12);
        for (double v : p) EXPECT_GE(v, 0.2 / 4.0 - 1e-15);
    }
    EXPECT_THROW(exp3_probabilities(std::vector<double>{0.0, 1.0}, 1.0, 1.5), InvalidArgument);
    EXPECT_THROW(exp3_probabilities(std::vector<double>{0.0, 1.0}, 1.0, -0.1), InvalidArgument);
}

TEST(Select, DegenerateDistribution) {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(select_nominee(std::vector<double>{1.0, 0.0, 0.0}, rng), 0u);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(select_nominee(std::vector<double>{0.0, 0.0, 1.0}, rng), 2u);
}

TEST(Select, UniformFrequencies) {
    Rng rng(9);
    std::vector<int> counts(3, 0);
    const std::vector<double> p(3, 1.0 / 3.0);
    for (int i = 0; i < 30000; ++i) counts[select_nominee(p, rng)]++;
    for (int c : counts) EXPECT_NEAR(c / 30000.0, 1.0 / 3.0, 0.02);
}

TEST(Select, SkewedFrequencies) {
    Rng rng(10);
    std::vector<int> counts(3, 0);
    const std::vector<double> p{0.6, 0.1, 0.3};
    for (int i = 0; i < 30000; ++i) counts[select_nominee(p, rng)]++;
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(counts[i] / 30000.0, p[i], 0.02);
}

TEST(Select, DeterministicAndSingleArmDrawsNothing) {
    const std::vector<double> p{0.2, 0.5, 0.3};
    Rng a(4), b(4);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(select_nominee(p, a), select_nominee(p, b));
    Rng c(4), untouched(4);
    EXPECT_EQ(select_nominee(std::vector<double>{1.0}, c), 0u);
    EXPECT_EQ(c(), untouched());
}

TEST(Select, MalformedDistributions) {
    Rng rng(1);
    EXPECT_THROW(select_nominee(std::vector<double>{}, rng), InvalidArgument);
    EXPECT_THROW(select_nominee(std::vector<double>{0.5, 0.4}, rng), InvalidArgument);
    EXPECT_THROW(select_nominee(std::vector<double>{1.5, -0.5}, rng), InvalidArgument);
    EXPECT_THROW(select_nominee(std::vector<double>{NAN, 1.0}, rng), InvalidArgument);
}

TEST(Rewards, PosteriorMeanAtEachNominee) {
    Rng rng(2);
    const Dataset d = seed_data(rng);
    const GpModel m = build_model(d, {Eigen::VectorXd::Constant(2, 0.3), 1e-6});
    const std::vector<Point> nominees{d[0].x, unit_square().sample_uniform(rng), unit_square().sample_uniform(rng)};
    const std::vector<double> r = compute_rewards(m, nominees);
    ASSERT_EQ(r.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r[i], predict(m, nominees[i]).mean, 1e-12);
    const std::vector<Point> same(4, nominees[1]);
    const std::vector<double> rs = compute_rewards(m, same);
    for (double v : rs) EXPECT_EQ(v, rs.front());
    EXPECT_EQ(compute_rewards(m, std::span<const Point>(nominees.data(), 1)).front(), predict(m, nominees[0]).mean);
}

TEST(Gains, HedgeAndExp3Updates) {
    const PortfolioState hedge = PortfolioState::initial(2, Strategy::Hedge);
    const std::vector<double> r{0.5, 0.2};
    EXPECT_EQ(update_gains(hedge, r, 0).gains, (std::vector<double>{0.5, 0.2}));

    for (double eta : {0.1, 1.0, 7.0}) {
        const PortfolioState exp3 = PortfolioState::initial(2, Strategy::Exp3, eta, 0.3);
        EXPECT_EQ(update_gains(exp3, r, 0).gains, (std::vector<double>{1.0, 0.0}));
    }

    const std::vector<double> r2{-0.25, 1.5};
    const PortfolioState twice = update_gains(update_gains(hedge, r, 1), r2, 0);
    EXPECT_EQ(twice.gains, (std::vector<double>{0.5 + -0.25, 0.2 + 1.5}));

    const PortfolioState single = PortfolioState::initial(2, Strategy::Single, 1.0, 0.1, 1);
    EXPECT_EQ(update_gains(single, r, 1).gains, single.gains);
}

TEST(Gains, Exp3UsesUnmixedHedgeWeight) {
    PortfolioState s = PortfolioState::initial(2, Strategy::Exp3, std::numbers::ln2, 0.5);
    s.gains = {1.0, 0.0};
    const PortfolioState next = update_gains(s, std::vector<double>{0.0, 0.9}, 1);
    EXPECT_NEAR(next.gains[1], 0.9 * 3.0, 1e-12);
    EXPECT_EQ(next.gains[0], 1.0);
}

TEST(Gains, Errors) {
    const PortfolioState s = PortfolioState::initial(2, Strategy::Hedge);
    EXPECT_THROW(update_gains(s, std::vector<double>{0.1, 0.2}, 2), InvalidArgument);
    EXPECT_THROW(update_gains(s, std::vector<double>{0.1}, 0), InvalidArgument);
    EXPECT_THROW(PortfolioState::initial(0, Strategy::Hedge), InvalidArgument);
    EXPECT_THROW(PortfolioState::initial(2, Strategy::Hedge, 0.0), InvalidArgument);
    EXPECT_THROW(PortfolioState::initial(2, Strategy::Single, 1.0, 0.1, 2), InvalidArgument);
}

TEST(Step, StructureAndSingleArmPortfolio) {
    Rng rng(21);
    Dataset d = seed_data(rng);
    const Surrogate sur = fixed_surrogate(d);
    const std::vector<AcquisitionSpec> specs{AcquisitionSpec::ei(0.01)};
    PortfolioState state = PortfolioState::initial(1, Strategy::Hedge);
    for (int t = 0; t < 8; ++t) {
        const StepResult s = gp_hedge_step(state, d, specs, bowl, unit_square(), small_budget(), sur, rng);
        EXPECT_EQ(s.chosen, 0u);
        EXPECT_EQ(s.dataset.size(), d.size() + 1);
        EXPECT_EQ(s.dataset[d.size()].x, s.nominees.nominees[0]);
        EXPECT_EQ(s.dataset[d.size()].y, s.y);
        EXPECT_EQ(s.state.steps, t + 1);
        d = s.dataset;
        state = s.state;
    }
}

TEST(Step, ReducesToDirectSingleAcquisitionLoop) {
    Rng init(33);
    const Dataset start = seed_data(init);
    const Surrogate sur = fixed_surrogate(start);
    const std::vector<AcquisitionSpec> specs{AcquisitionSpec::ei(0.01)};

    Rng rng_a(77);
    Dataset a = start;
    PortfolioState state = PortfolioState::initial(1, Strategy::Hedge);
    for (int t = 0; t < 10; ++t) {
        StepResult s = gp_hedge_step(state, a, specs, bowl, unit_square(), small_budget(), sur, rng_a);
        a = std::move(s.dataset);
        state = std::move(s.state);
    }

    Rng rng_b(77);
    Dataset b = start;
    for (int t = 1; t <= 10; ++t) {
        const GpModel m = build_model(rescaled(b, sur.scaling), sur.params);
        const IncumbentContext ctx{sur.scaling.apply(b.best_value()), t, 2};
        const Point x = propose(m, specs[0], unit_square(), ctx, small_budget(), rng_b).point;
        b.add(x, bowl(x));
    }
    EXPECT_TRUE(a == b);
}

TEST(Step, BitReproducibleUnderSeed) {
    Rng init(8);
    const Dataset start = seed_data(init);
    const Surrogate sur = fixed_surrogate(start);
    const std::vector<AcquisitionSpec> specs = three_arms();
    auto run = [&](Rng rng) {
        Dataset d = start;
        PortfolioState st = PortfolioState::initial(3, Strategy::Hedge);
        std::vector<StepResult> out;
        for (int t = 0; t < 6; ++t) {
            out.push_back(gp_hedge_step(st, d, specs, bowl, unit_square(), small_budget(), sur, rng));
            d = out.back().dataset;
            st = out.back().state;
        }
        return out;
    };
    const auto x = run(Rng(99));
    const auto y = run(Rng(99));
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(x[i].chosen, y[i].chosen);
        EXPECT_EQ(x[i].y, y[i].y);
        EXPECT_EQ(x[i].state.gains, y[i].state.gains);
        for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(x[i].nominees.nominees[k], y[i].nominees.nominees[k]);
    }
}

TEST(Step, FullInformationAccountingAndIncumbent) {
    Rng rng(44);
    Dataset d = seed_data(rng);
    const Surrogate sur = fixed_surrogate(d);
    const std::vector<AcquisitionSpec> specs = three_arms();
    PortfolioState st = PortfolioState::initial(3, Strategy::Hedge);
    std::vector<double> tally(3, 0.0);
    double incumbent = d.best_value();
    for (int t = 0; t < 15; ++t) {
        const StepResult s = gp_hedge_step(st, d, specs, bowl, unit_square(), small_budget(), sur, rng);
        EXPECT_NEAR(sum(s.probabilities), 1.0, 1e-12);
        for (std::size_t i = 0; i < 3; ++i) tally[i] += s.nominees.rewards[i];
        EXPECT_GE(s.dataset.best_value(), incumbent);
        incumbent = s.dataset.best_value();
        d = s.dataset;
        st = s.state;
    }
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(st.gains[i], tally[i], 1e-9);
}

TEST(Step, RewardsComeFromTheUpdatedModel) {
    Rng rng(45);
    const Dataset d = seed_data(rng);
    const Surrogate sur = fixed_surrogate(d);
    const StepResult s = gp_hedge_step(PortfolioState::initial(3, Strategy::Hedge), d, three_arms(), bowl,
                                       unit_square(), small_budget(), sur, rng);
    const GpModel after = build_surrogate(s.dataset, sur);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(s.nominees.rewards[i], predict(after, s.nominees.nominees[i]).mean, 1e-12);
    }
}

TEST(Step, SingleStrategyKeepsRewardsButNotGains) {
    Rng rng(46);
    Dataset d = seed_data(rng);
    const Surrogate sur = fixed_surrogate(d);
    PortfolioState st = PortfolioState::initial(3, Strategy::Single, 1.0, 0.1, 2);
    for (int t = 0; t < 4; ++t) {
        const StepResult s = gp_hedge_step(st, d, three_arms(), bowl, unit_square(), small_budget(), sur, rng);
        EXPECT_EQ(s.chosen, 2u);
        EXPECT_EQ(s.probabilities, (std::vector<double>{0.0, 0.0, 1.0}));
        EXPECT_EQ(s.nominees.rewards.size(), 3u);
        EXPECT_EQ(s.state.gains, (std::vector<double>{0.0, 0.0, 0.0}));
        d = s.dataset;
        st = s.state;
    }
}

TEST(Step, Exp3RunsAndKeepsFloor) {
    Rng rng(47);
    Dataset d = seed_data(rng);
    const Surrogate sur = fixed_surrogate(d);
    PortfolioState st = PortfolioState::initial(3, Strategy::Exp3, 1.0, 0.3);
    for (int t = 0; t < 5; ++t) {
        const StepResult s = gp_hedge_step(st, d, three_arms(), bowl, unit_square(), small_budget(), sur, rng);
        for (double p : s.probabilities) EXPECT_GE(p, 0.1 - 1e-15);
        d = s.dataset;
        st = s.state;
    }
}

TEST(Step, NonFiniteObjectiveCarriesThePoint) {
    Rng rng(48);
    const Dataset d = seed_data(rng);
    const Objective broken = [](const Point&) { return std::numeric_limits<double>::quiet_NaN(); };
    try {
        gp_hedge_step(PortfolioState::initial(1, Strategy::Hedge), d, std::vector<AcquisitionSpec>{AcquisitionSpec::ei()},
                      broken, unit_square(), small_budget(), fixed_surrogate(d), rng);
        FAIL() << "expected an evaluation error";
    } catch (const EvaluationError& e) {
        EXPECT_EQ(e.point().size(), 2);
        EXPECT_TRUE(unit_square().contains(e.point()));
    }
}

TEST(Step, MismatchedPortfolioThrows) {
    Rng rng(49);
    const Dataset d = seed_data(rng);
    EXPECT_THROW(gp_hedge_step(PortfolioState::initial(2, Strategy::Hedge), d, three_arms(), bowl, unit_square(),
                               small_budget(), fixed_surrogate(d), rng),
                 InvalidArgument);
}

TEST(Step, ThompsonArmNominates) {
    Rng rng(50);
    const Dataset d = seed_data(rng);
    const std::vector<AcquisitionSpec> specs{AcquisitionSpec::thompson(100), AcquisitionSpec::ei()};
    const StepResult s = gp_hedge_step(PortfolioState::initial(2, Strategy::Hedge), d, specs, bowl, unit_square(),
                                       small_budget(), fixed_surrogate(d), rng);
    EXPECT_TRUE(unit_square().contains(s.nominees.nominees[0]));
}

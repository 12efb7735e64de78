#include <hedgebo/optimizer.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace hedgebo;

namespace {

Point pt(std::initializer_list<double> v) {
    Point p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) p[i++] = x;
    return p;
}

GpModel wavy_model_1d() {
    Dataset d(1);
    for (double x : {0.05, 0.2, 0.45, 0.6, 0.9}) {
        d.add(pt({x}), std::sin(7.0 * x));
    }
    return build_model(d, {pt({0.15}), 1e-6});
}

GpModel random_model(std::size_t dim, std::size_t n, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    Dataset d(dim);
    for (std::size_t i = 0; i < n; ++i) {
        Point x(static_cast<Eigen::Index>(dim));
        for (auto& c : x) c = u(rng);
        d.add(x, z(rng));
    }
    return build_model(d, {Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), 0.3), 1e-6});
}

BoxDomain unit_box(std::size_t dim) {
    return BoxDomain(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)),
                     Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim)));
}

}  // namespace

TEST(Budget, DefaultsAndValidation) {
    const ProposalBudget b = ProposalBudget::defaults_for(6);
    EXPECT_EQ(b.n_candidates, 6000);
    EXPECT_EQ(b.n_local_steps, 20);
    EXPECT_EQ(b.local_shrink, 0.5);
    ProposalBudget bad = b;
    bad.n_candidates = 0;
    EXPECT_THROW(bad.validate(), InvalidArgument);
    bad = b;
    bad.local_shrink = 1.0;
    EXPECT_THROW(bad.validate(), InvalidArgument);
    bad = b;
    bad.n_local_steps = -1;
    EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(Propose, GridScanOracle) {
    const GpModel m = wavy_model_1d();
    const BoxDomain box = unit_box(1);
    const IncumbentContext ctx{std::sin(7.0 * 0.2), 3, 1};
    Eigen::MatrixXd grid(1, 200);
    for (Eigen::Index j = 0; j < 200; ++j) grid(0, j) = static_cast<double>(j) / 199.0;
    ProposalBudget budget;
    budget.n_candidates = 200;
    budget.n_local_steps = 0;
    for (const auto& spec : {AcquisitionSpec::ei(0.01), AcquisitionSpec::pi(0.01), AcquisitionSpec::ucb(1.5),
                             AcquisitionSpec::gp_ucb(0.1, 0.2), AcquisitionSpec::eipi(0.01, 1.0)}) {
        Eigen::Index want = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < 200; ++j) {
            const double v = acquisition_value(spec, predict(m, grid.col(j)), ctx);
            if (v > best) {
                best = v;
                want = j;
            }
        }
        const Proposal got = propose_from(m, spec, box, ctx, grid, budget);
        EXPECT_EQ(got.point[0], grid(0, want)) << spec.label;
        EXPECT_NEAR(got.value, best, 1e-12) << spec.label;
    }
}

TEST(Propose, PriorTiesKeepTheFirstDraw) {
    const GpModel prior = build_model(Dataset(2), {pt({0.3, 0.3}), 1e-6});
    const BoxDomain box(pt({-5.0, 0.0}), pt({10.0, 15.0}));
    Rng rng(7);
    Rng replay = rng;
    const Point first = box.sample_uniform(replay);
    const Proposal p =
        propose(prior, AcquisitionSpec::pi(0.01), box, {0.0, 1, 2}, ProposalBudget::defaults_for(2), rng);
    EXPECT_EQ(p.point, first);
}

TEST(Propose, DeterministicUnderSeed) {
    Rng data_rng(3);
    const GpModel m = random_model(3, 12, data_rng);
    const BoxDomain box = unit_box(3);
    const IncumbentContext ctx{m.dataset().best_value(), 4, 3};
    Rng a(55), b(55);
    const Proposal pa = propose(m, AcquisitionSpec::ei(), box, ctx, ProposalBudget::defaults_for(3), a);
    const Proposal pb = propose(m, AcquisitionSpec::ei(), box, ctx, ProposalBudget::defaults_for(3), b);
    EXPECT_EQ(pa.point, pb.point);
    EXPECT_EQ(pa.value, pb.value);
}

TEST(Propose, FeasibleAndNeverWorseThanRawCandidates) {
    Rng rng(13);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t dim = 1 + static_cast<std::size_t>(rep % 4);
        const GpModel m = random_model(dim, 10, rng);
        const BoxDomain box = unit_box(dim);
        const IncumbentContext ctx{m.dataset().best_value(), rep + 1, static_cast<int>(dim)};
        ProposalBudget budget;
        budget.n_candidates = 50;
        Eigen::MatrixXd cands(static_cast<Eigen::Index>(dim), budget.n_candidates);
        for (Eigen::Index j = 0; j < cands.cols(); ++j) cands.col(j) = box.sample_uniform(rng);
        for (const auto& spec : {AcquisitionSpec::ei(), AcquisitionSpec::pi(), AcquisitionSpec::gp_ucb(),
                                 AcquisitionSpec::ucb(3.0)}) {
            double raw = -std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < cands.cols(); ++j) {
                raw = std::max(raw, acquisition_value(spec, predict(m, cands.col(j)), ctx));
            }
            const Proposal p = propose_from(m, spec, box, ctx, cands, budget);
            EXPECT_TRUE(box.contains(p.point));
            EXPECT_GE(p.value, p.best_raw_value);
            // Near-zero variances differ between batch and pointwise by an ulp before the square root.
            EXPECT_NEAR(p.best_raw_value, raw, 1e-9) << spec.label;
            EXPECT_NEAR(p.value, acquisition_value(spec, predict(m, p.point), ctx), 1e-9) << spec.label;
        }
    }
}

TEST(Propose, LocalSearchReachesBoundaryOptimum) {
    Dataset d(1);
    d.add(pt({0.0}), 0.0);
    d.add(pt({0.5}), 0.5);
    d.add(pt({1.0}), 1.0);
    const GpModel m = build_model(d, {pt({2.0}), 1e-6});
    Eigen::MatrixXd start(1, 1);
    start << 0.6;
    ProposalBudget budget;
    budget.n_candidates = 1;
    const Proposal p = propose_from(m, AcquisitionSpec::ucb(0.0), unit_box(1), {1.0, 1, 1}, start, budget);
    EXPECT_EQ(p.point[0], 1.0);
}

TEST(Propose, Errors) {
    Rng rng(1);
    const GpModel m = random_model(2, 5, rng);
    EXPECT_THROW(propose(m, AcquisitionSpec::ei(), unit_box(3), {0.0, 1, 3}, ProposalBudget{}, rng),
                 InvalidArgument);
    EXPECT_THROW(propose(m, AcquisitionSpec::thompson(), unit_box(2), {0.0, 1, 2}, ProposalBudget{}, rng),
                 UnsupportedDispatch);
    EXPECT_THROW(propose_from(m, AcquisitionSpec::ei(), unit_box(2), {0.0, 1, 2}, Eigen::MatrixXd(2, 0),
                              ProposalBudget{}),
                 InvalidArgument);
}

TEST(Thompson, SingleCandidateIsReturned) {
    Rng data_rng(19);
    const GpModel m = random_model(2, 6, data_rng);
    const BoxDomain box = unit_box(2);
    Rng rng(77);
    Rng replay = rng;
    EXPECT_EQ(propose_thompson(m, box, 1, rng), box.sample_uniform(replay));
}

TEST(Thompson, ConcentratesOnTheHighMeanCandidate) {
    Dataset d(1);
    for (int i = 0; i <= 40; ++i) {
        const double x = i / 40.0;
        d.add(pt({x}), 10.0 * x);
    }
    const GpModel m = build_model(d, {pt({0.3}), 1e-6});
    const BoxDomain box = unit_box(1);
    int hits = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        Rng rng(5000 + rep);
        Rng replay = rng;
        const Point a = box.sample_uniform(replay);
        const Point b = box.sample_uniform(replay);
        const Point high = predict(m, a).mean >= predict(m, b).mean ? a : b;
        hits += propose_thompson(m, box, 2, rng) == high ? 1 : 0;
    }
    EXPECT_GE(hits, 990);
}

TEST(Thompson, DeterministicAndFeasible) {
    Rng data_rng(23);
    const GpModel m = random_model(3, 10, data_rng);
    const BoxDomain box = unit_box(3);
    Rng a(8), b(8);
    const Point pa = propose_thompson(m, box, 200, a);
    EXPECT_EQ(pa, propose_thompson(m, box, 200, b));
    EXPECT_TRUE(box.contains(pa));
    EXPECT_THROW(propose_thompson(m, box, 0, a), InvalidArgument);
}

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "levydrift/errors.hpp"
#include "levydrift/estimators.hpp"
#include "levydrift/likelihood.hpp"
#include "support.hpp"

namespace ld = levydrift;
using ld::testing::theta;

namespace {

const double inf = std::numeric_limits<double>::infinity();

ld::LikelihoodContext single_increment_context() {
    return {ld::ou_model(1.0), ld::testing::observations({0.0, 0.1}, {1.0, 0.9}), ld::FilterConfig::explicit_cutoff(0.2)};
}

double fd_partial(const ld::LikelihoodContext& ctx, ld::ParamVector th, int j) {
    const double h = 1e-5 * (1.0 + std::fabs(th[j]));
    th[j] += h;
    const double up = ld::filtered_loglik(ctx, th);
    th[j] -= 2.0 * h;
    const double down = ld::filtered_loglik(ctx, th);
    return (up - down) / (2.0 * h);
}

}  // namespace

TEST(FilteredLoglik, SingleIncrementQuadratic) {
    const auto ctx = single_increment_context();
    for (double t1 : {-3.0, 0.0, 0.5, 1.0, 4.0}) {
        EXPECT_NEAR(ld::filtered_loglik(ctx, theta({t1, 0})), 0.1 * t1 - 0.05 * t1 * t1, 1e-15);
        EXPECT_NEAR(ld::filtered_score(ctx, theta({t1, 0}))[0], 0.1 - 0.1 * t1, 1e-15);
    }
    EXPECT_NEAR(ld::filtered_score(ctx, theta({1, 0}))[0], 0.0, 1e-15);
}

TEST(FilteredLoglik, ZeroDriftGivesZero) {
    const auto p = ld::simulate_path(ld::testing::ou_with_jumps(), theta({2, 0}), 1.0, 5.0, 5000, 1);
    const auto obs = ld::subsample(p, 500);
    for (const char* name : {"ou", "cir", "hyperbolic"}) {
        const auto m = ld::make_model(name, 1.0);
        ld::LikelihoodContext ctx(m, obs, ld::FilterConfig::standard());
        EXPECT_EQ(ld::filtered_loglik(ctx, ld::ParamVector::Zero(m.param_dim)), 0.0) << name;
    }
    EXPECT_EQ(ld::oracle_continuous_loglik(p, ld::ou_model(1.0), theta({0, 0})), 0.0);
}

TEST(FilteredLoglik, AllRejectedIsNonPositive) {
    const auto p = ld::simulate_path(ld::testing::ou_with_jumps(), theta({2, 0}), 1.0, 5.0, 5000, 2);
    const auto obs = ld::subsample(p, 500);
    ld::LikelihoodContext ctx(ld::ou_model(1.0), obs, ld::FilterConfig::explicit_cutoff(0.0));
    EXPECT_EQ(ctx.rejected_count(), 500u);
    ld::Rng rng = ld::make_rng(3);
    for (int k = 0; k < 50; ++k) {
        const auto th = ld::testing::random_theta(2, -5, 5, rng);
        double expected = 0.0;
        for (std::size_t i = 1; i <= obs.size(); ++i) {
            const double b = th[1] - th[0] * obs.values[i - 1];
            expected -= 0.5 * b * b * obs.step(i);
        }
        EXPECT_LE(ld::filtered_loglik(ctx, th), 0.0);
        EXPECT_NEAR(ld::filtered_loglik(ctx, th), expected, 1e-10 * (1.0 + std::fabs(expected)));
    }
}

// Property: score agrees with central differences of the objective.
TEST(FilteredScore, MatchesFiniteDifferences) {
    ld::Rng rng = ld::make_rng(4);
    for (const auto& sc : ld::testing::builtin_scenarios()) {
        const auto p = ld::simulate_path(sc.model, sc.theta_true, sc.x0, 10.0, 20000, 5);
        ld::LikelihoodContext ctx(sc.model, ld::subsample(p, 1000), ld::FilterConfig::standard());
        for (int k = 0; k < 20; ++k) {
            const auto th = ld::testing::random_theta(sc.model.param_dim, -5, 5, rng);
            const Eigen::VectorXd s = ld::filtered_score(ctx, th);
            for (int j = 0; j < sc.model.param_dim; ++j)
                EXPECT_LT(std::fabs(s[j] - fd_partial(ctx, th, j)), 1e-5 * (1.0 + s.cwiseAbs().maxCoeff()))
                    << sc.model.name << " component " << j;
        }
    }
}

// Property: for drifts linear in θ the Hessian is constant and negative semidefinite.
TEST(FilteredHessian, ConstantAndNegativeSemidefinite) {
    ld::Rng rng = ld::make_rng(6);
    for (const auto& sc : ld::testing::builtin_scenarios()) {
        const auto p = ld::simulate_path(sc.model, sc.theta_true, sc.x0, 10.0, 20000, 7);
        ld::LikelihoodContext ctx(sc.model, ld::subsample(p, 1000), ld::FilterConfig::standard());
        const Eigen::MatrixXd ref = ld::filtered_hessian(ctx, sc.theta_true);
        for (int k = 0; k < 20; ++k) {
            const auto th = ld::testing::random_theta(sc.model.param_dim, -5, 5, rng);
            const Eigen::MatrixXd h = ld::filtered_hessian(ctx, th);
            EXPECT_LT((h - ref).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + ref.cwiseAbs().maxCoeff())) << sc.model.name;
            EXPECT_TRUE(h.isApprox(h.transpose()));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
            EXPECT_LE(eig.eigenvalues().maxCoeff(), 1e-10) << sc.model.name;
        }
    }
}

TEST(LikelihoodContext, CirSkipsNonPositiveStates) {
    const auto obs = ld::testing::unit_grid({1.0, 0.5, -0.1, 0.0, 0.3, 0.7}, 0.1);
    ld::LikelihoodContext ctx(ld::cir_model(0.5), obs, ld::FilterConfig::explicit_cutoff(inf));
    EXPECT_EQ(ctx.skipped_count(), 2u);
    EXPECT_EQ(ctx.terms().size(), 3u);
    EXPECT_TRUE(std::isfinite(ld::filtered_loglik(ctx, theta({0.1, 2}))));
}

TEST(LikelihoodContext, VanishingDiffusionNamesIndex) {
    auto m = ld::ou_model(1.0);
    m.diffusion.eval = [](double x) { return x; };
    const auto obs = ld::testing::unit_grid({1.0, 0.5, 0.0, 0.3}, 0.1);
    try {
        ld::LikelihoodContext ctx(m, obs, ld::FilterConfig::standard());
        FAIL();
    } catch (const ld::Error& e) {
        EXPECT_EQ(e.kind(), ld::ErrorKind::degenerate_diffusion);
        ASSERT_TRUE(e.index().has_value());
        EXPECT_EQ(*e.index(), 2u);
    }
}

TEST(LikelihoodContext, NonFiniteDriftIsEvaluationError) {
    auto m = ld::ou_model(1.0);
    m.drift.eval = [](const ld::ParamVector& th, double x) { return th[0] / x; };
    m.param_dim = 1;
    m.param_bounds = ld::default_bounds(1);
    ld::LikelihoodContext ctx(m, ld::testing::unit_grid({1.0, 0.0, 0.3}, 0.1), ld::FilterConfig::standard());
    try {
        ld::filtered_loglik(ctx, theta({1}));
        FAIL();
    } catch (const ld::Error& e) {
        EXPECT_EQ(e.kind(), ld::ErrorKind::evaluation);
    }
}

TEST(LikelihoodContext, EndpointSelectsState) {
    const auto obs = ld::testing::unit_grid({1.0, 2.0, 4.0});
    ld::LikelihoodContext left(ld::ou_model(1.0), obs, ld::FilterConfig::explicit_cutoff(inf));
    ld::LikelihoodContext right(ld::ou_model(1.0), obs, ld::FilterConfig::explicit_cutoff(inf), ld::Endpoint::right);
    EXPECT_EQ(left.terms()[0].state, 1.0);
    EXPECT_EQ(right.terms()[0].state, 2.0);
}

TEST(OracleLoglik, NeedsDecomposition) {
    ld::SimulationOptions opt;
    opt.keep_decomposition = false;
    const auto p = ld::simulate_path(ld::ou_model(1.0), theta({2, 0}), 1.0, 1.0, 100, 1, opt);
    try {
        ld::oracle_continuous_loglik(p, ld::ou_model(1.0), theta({2, 0}));
        FAIL();
    } catch (const ld::Error& e) {
        EXPECT_EQ(e.kind(), ld::ErrorKind::unsupported);
    }
}

TEST(OracleLoglik, EqualsFilteredOnJumpFreeFineGrid) {
    const auto m = ld::ou_model(1.0);
    const auto p = ld::simulate_path(m, theta({2, 0}), 1.0, 10.0, 20000, 8);
    ld::LikelihoodContext ctx(m, ld::to_observations(p), ld::FilterConfig::explicit_cutoff(inf));
    for (const auto& th : {theta({2, 0}), theta({-1, 3}), theta({0.5, 0.5})}) {
        const double oracle = ld::oracle_continuous_loglik(p, m, th);
        EXPECT_NEAR(ld::filtered_loglik(ctx, th), oracle, 1e-9 * (1.0 + std::fabs(oracle)));
    }
}

TEST(OracleLoglik, FilteredCloseToOracleAtTruth) {
    const auto m = ld::testing::ou_with_jumps(1.0, 1.0);
    const auto p = ld::simulate_path(m, theta({2, 0}), 1.0, 10.0, 100000, 9);
    ld::LikelihoodContext ctx(m, ld::subsample(p, 2000), ld::FilterConfig::standard());
    const double gap = std::fabs(ld::filtered_loglik(ctx, theta({2, 0})) - ld::oracle_continuous_loglik(p, m, theta({2, 0})));
    EXPECT_LT(gap / 10.0, 0.1);
}

// Median error of the estimator shrinks along growing (t_n, n).
TEST(FilteredLoglik, ConsistencyTrend) {
    const auto m = ld::testing::ou_with_jumps(1.0, 1.0);
    const std::vector<std::pair<double, std::size_t>> designs{{5.0, 600}, {10.0, 2000}, {20.0, 8000}};
    std::vector<double> medians;
    for (const auto& [t_n, n] : designs) {
        std::vector<double> errors;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto p = ld::simulate_path(m, theta({2, 0}), 1.0, t_n, 50 * n, ld::derive_seed(n, seed));
            const auto r = ld::fmle_ou(ld::subsample(p, n), ld::FilterConfig::standard());
            errors.push_back((r.theta_hat - theta({2, 0})).norm());
        }
        std::nth_element(errors.begin(), errors.begin() + 50, errors.end());
        medians.push_back(errors[50]);
    }
    EXPECT_GT(medians[0], medians[1]);
    EXPECT_GT(medians[1], medians[2]);
}

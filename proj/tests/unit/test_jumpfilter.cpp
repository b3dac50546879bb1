#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include "levydrift/errors.hpp"
#include "levydrift/jumpfilter.hpp"
#include "support.hpp"

namespace ld = levydrift;
using ld::testing::theta;
using ld::testing::unit_grid;

namespace {

const ld::ThetaStateFn one = [](const ld::ParamVector&, double) { return 1.0; };
const ld::ThetaStateFn zero = [](const ld::ParamVector&, double) { return 0.0; };
const ld::ThetaStateFn identity = [](const ld::ParamVector&, double x) { return x; };
const ld::ParamVector no_theta = theta({0});

// Increments (0.1, 0.5, −0.05).
ld::Observations small_example() { return unit_grid({0.0, 0.1, 0.6, 0.55}); }

double unfiltered_sum(const ld::ThetaStateFn& f, const ld::Observations& obs) {
    double s = 0.0;
    for (std::size_t i = 1; i <= obs.size(); ++i) s += f(no_theta, obs.values[i - 1]) * obs.increment(i);
    return s;
}

}  // namespace

TEST(Cutoff, Examples) {
    EXPECT_NEAR(ld::cutoff_value(0.01, ld::FilterConfig::from_power(1.0 / 3.0)), 0.2154435, 1e-7);
    EXPECT_NEAR(ld::cutoff_value(0.25, ld::FilterConfig::from_epsilon(0.25)), 0.7071068, 1e-7);
    EXPECT_EQ(ld::cutoff_value(0.37, ld::FilterConfig::explicit_cutoff(0.1)), 0.1);
    EXPECT_DOUBLE_EQ(ld::cutoff_value(0.01, ld::FilterConfig::standard()),
                     ld::cutoff_value(0.01, ld::FilterConfig::from_epsilon(1.0 / 6.0)));
}

TEST(Cutoff, WarnsForLargeStep) {
    std::vector<std::string> w;
    ld::cutoff_value(2.0, ld::FilterConfig::standard(), &w);
    EXPECT_EQ(w.size(), 1u);
    w.clear();
    ld::cutoff_value(0.5, ld::FilterConfig::standard(), &w);
    EXPECT_TRUE(w.empty());
}

TEST(FilterConfig, RejectsOutOfRange) {
    EXPECT_THROW(ld::FilterConfig::from_epsilon(0.0), ld::Error);
    EXPECT_THROW(ld::FilterConfig::from_epsilon(0.5), ld::Error);
    EXPECT_THROW(ld::FilterConfig::from_power(0.0), ld::Error);
    EXPECT_THROW(ld::FilterConfig::from_power(0.6), ld::Error);
    EXPECT_NO_THROW(ld::FilterConfig::from_power(0.5));
    EXPECT_THROW(ld::FilterConfig::explicit_cutoff(-1.0), ld::Error);
    EXPECT_THROW(ld::FilterConfig::explicit_cutoff(std::nan("")), ld::Error);
}

TEST(ApplyFilter, MaskExample) {
    const auto r = ld::apply_filter(small_example(), ld::FilterConfig::explicit_cutoff(0.2));
    EXPECT_EQ(r.mask, (std::vector<std::uint8_t>{1, 0, 1}));
    EXPECT_EQ(r.rejected_count, 1u);
    EXPECT_EQ(r.cutoff, 0.2);
}

TEST(ApplyFilter, InfiniteAndZeroCutoff) {
    const auto obs = small_example();
    const auto all = ld::apply_cutoff(obs, std::numeric_limits<double>::infinity());
    EXPECT_EQ(all.rejected_count, 0u);
    const auto none = ld::apply_cutoff(obs, 0.0);
    EXPECT_EQ(none.rejected_count, 3u);
}

TEST(ApplyFilter, BoundaryIncrementIsKept) {
    const auto r = ld::apply_cutoff(unit_grid({0.0, 0.25, 0.0}), 0.25);
    EXPECT_EQ(r.rejected_count, 0u);
}

TEST(FilteredIntegral, Examples) {
    const auto obs = small_example();
    const auto cfg = ld::FilterConfig::explicit_cutoff(0.2);
    EXPECT_NEAR(ld::filtered_integral(one, no_theta, obs, cfg), 0.05, 1e-15);
    EXPECT_EQ(ld::filtered_integral(zero, no_theta, obs, cfg), 0.0);
}

TEST(FilteredIntegral, NaNIntegrandNamesIndex) {
    const ld::ThetaStateFn bad = [](const ld::ParamVector&, double x) { return x > 0.5 ? std::nan("") : x; };
    try {
        ld::filtered_integral(bad, no_theta, small_example(), ld::FilterConfig::explicit_cutoff(1.0));
        FAIL();
    } catch (const ld::Error& e) {
        EXPECT_EQ(e.kind(), ld::ErrorKind::evaluation);
        ASSERT_TRUE(e.index().has_value());
        EXPECT_EQ(*e.index(), 2u);
    }
}

TEST(FilteredIntegral, MismatchedFilterRejected) {
    const auto r = ld::apply_cutoff(unit_grid({0, 1}), 1.0);
    EXPECT_THROW(ld::filtered_integral(one, no_theta, small_example(), r), ld::Error);
}

// Property: an infinite cutoff reproduces the plain Euler sum exactly.
TEST(FilteredIntegral, InfiniteCutoffEqualsEulerSum) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = ld::simulate_path(ld::testing::ou_with_jumps(1.0, 3.0), theta({2, 0}), 1.0, 5.0, 5000, seed);
        const auto obs = ld::subsample(p, 500);
        const double filtered = ld::filtered_integral(identity, no_theta, obs,
                                                      ld::FilterConfig::explicit_cutoff(std::numeric_limits<double>::infinity()));
        EXPECT_NEAR(filtered, unfiltered_sum(identity, obs), 1e-12 * (1.0 + std::fabs(filtered)));
    }
}

TEST(RiemannSum, Examples) {
    const auto obs = ld::testing::observations({0, 0.5, 2, 3}, {1, 5, -2, 7});
    const ld::ThetaStateFn c = [](const ld::ParamVector&, double) { return 2.5; };
    EXPECT_DOUBLE_EQ(ld::riemann_sum(c, no_theta, obs), 7.5);
    EXPECT_EQ(ld::riemann_sum(identity, no_theta, unit_grid({0, 2, 4})), 2.0);
}

TEST(RiemannSum, CoarseGridTracksFineQuadrature) {
    const ld::ThetaStateFn sq = [](const ld::ParamVector&, double x) { return x * x; };
    const auto p = ld::simulate_path(ld::testing::ou_with_jumps(), theta({2, 0}), 1.0, 10.0, 100000, 21);
    const double fine = ld::riemann_sum(sq, no_theta, ld::to_observations(p));
    const double coarse = ld::riemann_sum(sq, no_theta, ld::subsample(p, 100));
    EXPECT_LT(std::fabs(coarse - fine), 0.05 * fine);
}

// Property: rejected_count never increases as the cutoff grows.
TEST(ApplyFilter, RejectedCountMonotoneInCutoff) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = ld::simulate_path(ld::testing::ou_with_jumps(1.0, 5.0), theta({2, 0}), 1.0, 10.0, 10000, seed);
        const auto obs = ld::subsample(p, 1000);
        std::size_t prev = obs.size() + 1;
        for (double v = 0.0; v < 3.0; v += 0.05) {
            const auto r = ld::apply_cutoff(obs, v);
            ASSERT_LE(r.rejected_count, prev);
            prev = r.rejected_count;
        }
    }
}

// Property: scaling data and cutoff by the same c > 0 leaves the mask unchanged.
TEST(ApplyFilter, ScaleCovariance) {
    ld::Rng rng = ld::make_rng(31);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> uc(0.1, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x{0.0};
        for (int i = 0; i < 50; ++i) x.push_back(x.back() + z(rng));
        const double c = uc(rng);
        std::vector<double> scaled;
        for (double v : x) scaled.push_back(c * v);
        const double cutoff = 0.7;
        const auto a = ld::apply_cutoff(unit_grid(x), cutoff);
        const auto b = ld::apply_cutoff(unit_grid(scaled), c * cutoff);
        ASSERT_EQ(a.mask, b.mask) << "c = " << c;
    }
}

// (nΔ)⁻¹|filtered − ∫x dX^c| shrinks as n grows ×4 at fixed t_n, averaged over seeds.
TEST(FilteredIntegral, ApproachesContinuousPartIntegral) {
    auto scenarios = ld::testing::builtin_scenarios();
    scenarios.push_back({ld::make_model("ou", 1.0, ld::TemperedStable{0.5, 1.0, 1.0}), theta({2, 0}), 1.0});
    const double t_n = 10.0;
    for (const auto& sc : scenarios) {
        std::vector<double> err(3, 0.0);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto p = ld::simulate_path(sc.model, sc.theta_true, sc.x0, t_n, 160000, 500 + seed);
            int level = 0;
            for (std::size_t n : {500u, 2000u, 8000u}) {
                const auto obs = ld::subsample(p, n);
                const double filt = ld::filtered_integral(identity, no_theta, obs, ld::FilterConfig::standard());
                const double truth = ld::continuous_part_integral(identity, no_theta, p, obs);
                err[level++] += std::fabs(filt - truth) / t_n;
            }
        }
        EXPECT_GT(err[0], err[1]) << sc.model.name;
        EXPECT_GT(err[1], err[2]) << sc.model.name;
    }
}

TEST(ContinuousPartIntegral, NeedsDecompositionAndAlignment) {
    ld::SimulationOptions opt;
    opt.keep_decomposition = false;
    const auto bare = ld::simulate_path(ld::ou_model(1.0), theta({2, 0}), 1.0, 1.0, 100, 1, opt);
    EXPECT_THROW(ld::continuous_part_integral(identity, no_theta, bare, ld::subsample(bare, 10)), ld::Error);

    const auto p = ld::simulate_path(ld::ou_model(1.0), theta({2, 0}), 1.0, 1.0, 100, 1);
    auto obs = ld::subsample(p, 10);
    obs.values[3] += 1.0;
    try {
        ld::continuous_part_integral(identity, no_theta, p, obs);
        FAIL();
    } catch (const ld::Error& e) {
        EXPECT_EQ(e.kind(), ld::ErrorKind::invalid_argument);
    }
}

// Without jumps every rejection is a Gaussian tail event: P(|ΔX| > v) ≈ 2(1 − Φ(v/(σ√Δ))).
TEST(FilterDiagnostics, FalseRejectionsMatchGaussianTail) {
    const double t_n = 10.0, delta = 0.005;
    const std::size_t n = 2000;
    for (double sigma : {0.5, 1.0}) {
        std::size_t rejected = 0, intervals = 0;
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const auto p = ld::simulate_path(ld::ou_model(sigma), theta({2, 0}), 0.0, t_n, 100000, seed);
            const auto d = ld::filter_diagnostics(p, ld::subsample(p, n), ld::FilterConfig::from_epsilon(1.0 / 6.0));
            EXPECT_EQ(d.jump_intervals, 0u);
            EXPECT_EQ(d.false_rejections, d.rejected_count);
            rejected += d.false_rejections;
            intervals += d.jump_free_intervals;
        }
        const double v = std::cbrt(delta);
        const double tail = 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal(), v / (sigma * std::sqrt(delta))));
        const double rate = static_cast<double>(rejected) / intervals;
        EXPECT_NEAR(rate, tail, 4.0 * std::sqrt(tail / intervals) + 0.1 * tail) << "sigma " << sigma;
        if (sigma < 1.0) EXPECT_LT(rate, 0.01);
    }
}

TEST(FilterDiagnostics, HugeJumpsAlwaysDetected) {
    const std::size_t fine = 1000, n = 100;
    ld::Rng rng = ld::make_rng(4);
    auto noise = ld::draw_driving_noise(ld::NoJumps{}, 1.0, fine, rng);
    for (std::size_t i = 0; i < n; ++i) noise.jumps.push_back({i * 10 + 5, 0.5e-3, 10.0, false});
    const auto p = ld::integrate_path(ld::ou_model(1.0), theta({2, 0}), 0.0, 1.0, noise);
    const auto d = ld::filter_diagnostics(p, ld::subsample(p, n), ld::FilterConfig::standard());
    EXPECT_EQ(d.jump_intervals, n);
    EXPECT_EQ(d.detected_jumps, n);
    EXPECT_EQ(d.true_positive_rate, 1.0);
}

TEST(FilterDiagnostics, RejectsMisalignedObservations) {
    const auto p = ld::simulate_path(ld::ou_model(1.0), theta({2, 0}), 1.0, 1.0, 100, 1);
    const auto obs = ld::testing::observations({0.0, 0.333, 1.0}, {p.values[0], 0.0, p.values[100]});
    EXPECT_THROW(ld::filter_diagnostics(p, obs, ld::FilterConfig::standard()), ld::Error);
}

// Published "jumps filt" for OU, λ = 1, t_n = 10, n = 2000 is about 21.6.
TEST(FilterDiagnostics, RejectedCountNearPublishedTableOneRow) {
    const auto m = ld::testing::ou_with_jumps(1.0, 1.0);
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto p = ld::simulate_path(m, theta({2, 0}), 1.0, 10.0, 100000, 9000 + seed);
        const auto r = ld::apply_filter(ld::subsample(p, 2000), ld::FilterConfig::standard());
        inside += r.rejected_count >= 14 && r.rejected_count <= 30;
    }
    EXPECT_GE(inside, 90);
}

TEST(WriteMaskCsv, Format) {
    const auto obs = small_example();
    std::ostringstream os;
    ld::write_mask_csv(os, obs, ld::apply_cutoff(obs, 0.2));
    EXPECT_EQ(os.str(), "t,x,keep\n0,0,\n1,0.10000000000000001,1\n2,0.59999999999999998,0\n3,0.55000000000000004,1\n");
}

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "levydrift/estimators.hpp"
#include "levydrift/harness.hpp"
#include "levydrift/inference.hpp"
#include "levydrift/io.hpp"
#include "support.hpp"

namespace ld = levydrift;
using ld::testing::theta;

// simulate → CSV → read back → estimate → Fisher → interval around the truth.
TEST(Pipeline, CsvEstimateAndInterval) {
    for (const auto& sc : ld::testing::builtin_scenarios()) {
        const auto path = ld::simulate_path(sc.model, sc.theta_true, sc.x0, 50.0, 250000, 2024);
        std::stringstream csv;
        ld::write_observations_csv(csv, ld::subsample(path, 25000));
        const auto obs = ld::read_observations_csv(csv);

        const auto report = ld::estimate(sc.model, obs, ld::FilterConfig::standard(), ld::EstimatorKind::closed_form);
        ASSERT_TRUE(report.converged);
        const auto fisher = ld::fisher_ergodic(sc.model, report.theta_hat, obs);
        ASSERT_TRUE(fisher.inverse.has_value()) << sc.model.name;
        // 99.9% so that one fixed seed is a stable check of the whole chain
        const auto ci = ld::confidence_intervals(report.theta_hat, fisher, obs.span(), 0.999);
        for (int j = 0; j < sc.model.param_dim; ++j) {
            EXPECT_LE(ci[j].lo, sc.theta_true[j]) << sc.model.name << " component " << j;
            EXPECT_GE(ci[j].hi, sc.theta_true[j]) << sc.model.name << " component " << j;
        }
    }
}

TEST(Pipeline, GenericEstimatorOnTemperedStableDriver) {
    const auto m = ld::make_model("ou", 1.0, ld::TemperedStable{0.5, 1.0, 1.0});
    const auto obs = ld::subsample(ld::simulate_path(m, theta({2, 1}), 0.5, 50.0, 250000, 8), 25000);
    const auto closed = ld::fmle_ou(obs, ld::FilterConfig::standard());
    const auto generic = ld::estimate(m, obs, ld::FilterConfig::standard(), ld::EstimatorKind::generic);
    ASSERT_TRUE(generic.converged);
    EXPECT_LT((closed.theta_hat - generic.theta_hat).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_NEAR(generic.theta_hat[0], 2.0, 0.6);
    EXPECT_NEAR(generic.theta_hat[1], 1.0, 0.6);
}

// A JSON config drives a run whose result survives CSV/JSON export.
TEST(Pipeline, JsonConfigExperiment) {
    const auto cfg = ld::experiment_config_from_json(nlohmann::json::parse(R"({
        "model_name": "hyperbolic", "theta_true": [2.0], "sigma": 1.0,
        "levy": "stable:0.5", "t_n": 10, "n": 1000, "replications": 30,
        "base_seed": 5, "filter": {"power": 0.3333333333333333}, "coverage_level": 0.95
    })"));
    ld::ExperimentConfig direct;
    direct.model_name = "hyperbolic";
    direct.theta_true = theta({2.0});
    direct.sigma = 1.0;
    direct.levy = ld::AlphaStable{0.5, 1.0};
    direct.t_n = 10.0;
    direct.n = 1000;
    direct.replications = 30;
    direct.base_seed = 5;
    direct.filter = ld::FilterConfig::from_power(1.0 / 3.0);
    direct.coverage_level = 0.95;
    const auto res = ld::run_experiment(cfg);
    EXPECT_EQ(res, ld::run_experiment(direct));
    EXPECT_EQ(res.successes, 30u);
    ASSERT_TRUE(res.parameters[0].coverage.has_value());
    EXPECT_GE(*res.parameters[0].coverage, 0.0);
    EXPECT_LE(*res.parameters[0].coverage, 1.0);
    std::ostringstream os;
    ld::write_result_csv(os, res);
    EXPECT_NE(os.str().find("theta1,"), std::string::npos);
    EXPECT_EQ(ld::to_json(res).at("successes"), 30);
}

// The rate report and the check helper agree with the data actually simulated.
TEST(Pipeline, RateReportForTableSettings) {
    const auto& spec = ld::table_spec(1);
    for (const auto& row : spec.rows) {
        const auto cfg = ld::table_row_config(1, row, 1);
        const double delta = cfg.t_n / static_cast<double>(cfg.n);
        const auto report = ld::rate_condition_check(cfg.n, delta, 1.0 / 6.0, cfg.levy);
        ASSERT_NE(report.binding_term(), nullptr);
        EXPECT_EQ(report.binding_term()->expression, "n*Delta^(3-4eps)");
        EXPECT_NEAR(report.cutoff, std::cbrt(delta), 1e-12);
    }
}

#include "levydrift/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <omp.h>

#include "levydrift/errors.hpp"
#include "levydrift/inference.hpp"
#include "levydrift/io.hpp"
#include "levydrift/numeric.hpp"
#include "levydrift/rng.hpp"
#include "levydrift/simulate.hpp"

namespace levydrift {

double builtin_default_x0(const std::string& model_name, const ParamVector& theta) {
    if (model_name == "ou") return 1.0;
    if (model_name == "cir") {
        require(theta.size() == 2 && theta[1] != 0.0, "CIR default x0 needs theta2 != 0");
        return theta[0] / theta[1];
    }
    if (model_name == "hyperbolic") return 0.0;
    fail(ErrorKind::unsupported, "unknown model '" + model_name + "'");
}

double ExperimentConfig::effective_x0() const { return x0 ? *x0 : builtin_default_x0(model_name, theta_true); }

void ExperimentConfig::validate() const {
    require(replications >= 1, "experiment: replications must be >= 1");
    require(n >= 1, "experiment: n must be >= 1");
    require(effective_fine_steps() >= n, "experiment: fine_steps must be >= n");
    require(t_n > 0.0 && std::isfinite(t_n), "experiment: t_n must be > 0");
    require(burn_in_fraction >= 0.0 && std::isfinite(burn_in_fraction), "experiment: burn_in_fraction must be >= 0");
    if (coverage_level) require(*coverage_level >= 0.0 && *coverage_level < 1.0, "experiment: coverage_level in [0, 1)");
    require(theta_true.size() == builtin_param_dim(model_name), "experiment: theta_true has the wrong dimension");
    make_model(model_name, sigma, levy).validate_theta(theta_true);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

nlohmann::json filter_to_json(const FilterConfig& f) {
    switch (f.kind()) {
        case FilterConfig::Kind::epsilon: return {{"epsilon", f.value()}};
        case FilterConfig::Kind::power: return {{"power", f.value()}};
        case FilterConfig::Kind::explicit_cutoff:
            if (std::isinf(f.value())) return {{"cutoff", "inf"}};
            return {{"cutoff", f.value()}};
    }
    return {};
}

FilterConfig filter_from_json(const nlohmann::json& j) {
    require(j.is_object() && j.size() == 1, "JSON: filter must be one of {epsilon}, {power}, {cutoff}");
    if (j.contains("epsilon")) return FilterConfig::from_epsilon(j.at("epsilon").get<double>());
    if (j.contains("power")) return FilterConfig::from_power(j.at("power").get<double>());
    if (j.contains("cutoff")) {
        const auto& c = j.at("cutoff");
        if (c.is_string()) {
            require(c.get<std::string>() == "inf", "JSON: cutoff string must be \"inf\"");
            return FilterConfig::explicit_cutoff(std::numeric_limits<double>::infinity());
        }
        return FilterConfig::explicit_cutoff(c.get<double>());
    }
    fail(ErrorKind::invalid_argument, "JSON: filter must be one of {epsilon}, {power}, {cutoff}");
}

std::vector<double> to_vector(const ParamVector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json j{{"model_name", cfg.model_name},
                     {"theta_true", to_vector(cfg.theta_true)},
                     {"sigma", cfg.sigma},
                     {"levy", levy_to_json(cfg.levy)},
                     {"x0", cfg.x0 ? nlohmann::json(*cfg.x0) : nlohmann::json(nullptr)},
                     {"t_n", cfg.t_n},
                     {"n", cfg.n},
                     {"fine_steps", cfg.effective_fine_steps()},
                     {"filter", filter_to_json(cfg.filter)},
                     {"replications", cfg.replications},
                     {"base_seed", cfg.base_seed},
                     {"estimator", cfg.estimator == EstimatorKind::closed_form ? "closed-form" : "generic"},
                     {"endpoint", cfg.endpoint == Endpoint::left ? "left" : "right"},
                     {"burn_in_fraction", cfg.burn_in_fraction}};
    j["coverage_level"] = cfg.coverage_level ? nlohmann::json(*cfg.coverage_level) : nlohmann::json(nullptr);
    return j;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    static const std::vector<std::string> known{"model_name", "theta_true", "sigma",      "levy",
                                                "x0",         "t_n",        "n",          "fine_steps",
                                                "filter",     "replications", "base_seed", "estimator",
                                                "endpoint",   "burn_in_fraction", "coverage_level"};
    require(j.is_object(), "experiment config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            fail(ErrorKind::invalid_argument, "experiment config: unknown field '" + key + "'");
    try {
        ExperimentConfig cfg;
        cfg.model_name = j.at("model_name").get<std::string>();
        const auto theta = j.at("theta_true").get<std::vector<double>>();
        cfg.theta_true = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
        cfg.sigma = j.value("sigma", 1.0);
        if (j.contains("levy")) cfg.levy = levy_from_json(j.at("levy"));
        if (j.contains("x0") && !j.at("x0").is_null()) cfg.x0 = j.at("x0").get<double>();
        cfg.t_n = j.at("t_n").get<double>();
        cfg.n = j.at("n").get<std::size_t>();
        cfg.fine_steps = j.value("fine_steps", std::size_t{0});
        if (j.contains("filter")) cfg.filter = filter_from_json(j.at("filter"));
        cfg.replications = j.value("replications", cfg.replications);
        cfg.base_seed = j.value("base_seed", cfg.base_seed);
        const auto est = j.value("estimator", std::string("closed-form"));
        require(est == "closed-form" || est == "generic", "experiment config: estimator must be closed-form|generic");
        cfg.estimator = est == "generic" ? EstimatorKind::generic : EstimatorKind::closed_form;
        const auto ep = j.value("endpoint", std::string("left"));
        require(ep == "left" || ep == "right", "experiment config: endpoint must be left|right");
        cfg.endpoint = ep == "right" ? Endpoint::right : Endpoint::left;
        cfg.burn_in_fraction = j.value("burn_in_fraction", cfg.burn_in_fraction);
        if (j.contains("coverage_level") && !j.at("coverage_level").is_null())
            cfg.coverage_level = j.at("coverage_level").get<double>();
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::invalid_argument, std::string("experiment config: ") + e.what());
    }
}

nlohmann::json to_json(const ExperimentResult& result) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : result.parameters) {
        params.push_back({{"mean", p.mean},
                          {"std", p.std ? nlohmann::json(*p.std) : nlohmann::json(nullptr)},
                          {"mc_standard_error",
                           p.mc_standard_error ? nlohmann::json(*p.mc_standard_error) : nlohmann::json(nullptr)},
                          {"coverage", p.coverage ? nlohmann::json(*p.coverage) : nlohmann::json(nullptr)}});
    }
    return {{"parameters", params},
            {"mean_rejected", result.mean_rejected},
            {"successes", result.successes},
            {"failures", result.failures},
            {"failure_census", result.failure_census},
            {"wall_time", result.wall_time}};
}

void write_result_csv(std::ostream& os, const ExperimentResult& result) {
    const auto old_precision = os.precision(10);
    const auto opt = [&](const std::optional<double>& v) {
        if (v) os << *v;
    };
    os << "param,mean,std,mc_standard_error,coverage,mean_rejected,successes,failures\n";
    for (std::size_t j = 0; j < result.parameters.size(); ++j) {
        const auto& p = result.parameters[j];
        os << "theta" << j + 1 << ',' << p.mean << ',';
        opt(p.std);
        os << ',';
        opt(p.mc_standard_error);
        os << ',';
        opt(p.coverage);
        os << ',' << result.mean_rejected << ',' << result.successes << ',' << result.failures << '\n';
    }
    os.precision(old_precision);
}

// ---------------------------------------------------------------------------
// Replications
// ---------------------------------------------------------------------------

namespace {

std::string kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::io: return "io";
        case ErrorKind::divergence: return "divergence";
        case ErrorKind::degenerate_data: return "degenerate_data";
        case ErrorKind::degenerate_diffusion: return "degenerate_diffusion";
        case ErrorKind::singularity: return "singularity";
        case ErrorKind::evaluation: return "evaluation";
        case ErrorKind::unavailable: return "unavailable";
        case ErrorKind::experiment_failed: return "experiment_failed";
    }
    return "unknown";
}

}  // namespace

ReplicationOutcome run_replication(const ExperimentConfig& cfg, std::size_t index) {
    ReplicationOutcome out;
    try {
        const ParametricModel model = make_model(cfg.model_name, cfg.sigma, cfg.levy);
        const std::uint64_t seed = derive_seed(cfg.base_seed, index);
        const std::size_t fine = cfg.effective_fine_steps();
        SimulationOptions options;
        options.keep_decomposition = false;

        double x0 = cfg.effective_x0();
        if (cfg.burn_in_fraction > 0.0) {
            const auto burn_steps = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(cfg.burn_in_fraction * static_cast<double>(fine))));
            const SamplePath burn = simulate_path(model, cfg.theta_true, x0, cfg.burn_in_fraction * cfg.t_n,
                                                  burn_steps, derive_seed(seed, 0), options);
            x0 = burn.values.back();
        }
        const SamplePath path = simulate_path(model, cfg.theta_true, x0, cfg.t_n, fine, derive_seed(seed, 1), options);
        const Observations obs = subsample(path, cfg.n);
        const EstimateReport report = estimate(model, obs, cfg.filter, cfg.estimator, cfg.endpoint);
        if (!report.converged) {
            out.failure = "not_converged";
            return out;
        }
        out.theta_hat = report.theta_hat;
        out.rejected = report.rejected_count;
        if (cfg.coverage_level) {
            const FisherEstimate fisher = fisher_ergodic(model, report.theta_hat, obs);
            const auto ci = confidence_intervals(report.theta_hat, fisher, obs.span(), *cfg.coverage_level);
            for (std::size_t j = 0; j < ci.size(); ++j)
                out.covered.push_back(ci[j].contains(cfg.theta_true[static_cast<Eigen::Index>(j)]));
        }
    } catch (const Error& e) {
        out.theta_hat.reset();
        out.covered.clear();
        out.failure = kind_name(e.kind());
    }
    return out;
}

ExperimentResult aggregate(const ExperimentConfig& cfg, const std::vector<ReplicationOutcome>& outcomes) {
    const auto d = static_cast<std::size_t>(cfg.theta_true.size());
    ExperimentResult result;
    std::vector<CompensatedSum> sums(d);
    std::vector<std::size_t> covered(d, 0);
    CompensatedSum rejected;
    for (const auto& o : outcomes) {
        if (!o.theta_hat) {
            ++result.failures;
            ++result.failure_census[o.failure];
            continue;
        }
        ++result.successes;
        rejected += static_cast<double>(o.rejected);
        for (std::size_t j = 0; j < d; ++j) {
            sums[j] += (*o.theta_hat)[static_cast<Eigen::Index>(j)];
            if (j < o.covered.size() && o.covered[j]) ++covered[j];
        }
    }
    if (result.successes == 0) {
        std::ostringstream os;
        os << "all " << outcomes.size() << " replications failed:";
        for (const auto& [reason, count] : result.failure_census) os << ' ' << reason << '=' << count;
        fail(ErrorKind::experiment_failed, os.str());
    }
    const double r = static_cast<double>(result.successes);
    result.mean_rejected = rejected.value() / r;
    result.parameters.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        auto& p = result.parameters[j];
        p.mean = sums[j].value() / r;
        if (result.successes > 1) {
            CompensatedSum sq;
            for (const auto& o : outcomes) {
                if (!o.theta_hat) continue;
                const double dev = (*o.theta_hat)[static_cast<Eigen::Index>(j)] - p.mean;
                sq += dev * dev;
            }
            p.std = std::sqrt(sq.value() / (r - 1.0));
            p.mc_standard_error = *p.std / std::sqrt(r);
        }
        if (cfg.coverage_level) p.coverage = static_cast<double>(covered[j]) / r;
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    std::vector<ReplicationOutcome> outcomes(cfg.replications);
    const auto count = static_cast<std::int64_t>(cfg.replications);
    const int workers = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::int64_t r = 0; r < count; ++r) {
        try {
            outcomes[static_cast<std::size_t>(r)] = run_replication(cfg, static_cast<std::size_t>(r));
        } catch (const std::exception& e) {
            outcomes[static_cast<std::size_t>(r)].failure = std::string("internal: ") + e.what();
        }
    }
    ExperimentResult result = aggregate(cfg, outcomes);
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

ExperimentResult run_experiment_serial(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    std::vector<ReplicationOutcome> outcomes;
    outcomes.reserve(cfg.replications);
    for (std::size_t r = 0; r < cfg.replications; ++r) outcomes.push_back(run_replication(cfg, r));
    ExperimentResult result = aggregate(cfg, outcomes);
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

namespace {

// Jump-size rate for the CIR experiments; not printed with the table, chosen
// by matching its jumps-filtered column.
constexpr double cir_jump_rate = 0.6;

TableSpec make_table1() {
    TableSpec t{1, "theta1", 0, 500, {}};
    const std::vector<std::array<double, 8>> printed{
        {2, 100, 1.4, 0.7, 6.5, 1.4, 0.6, 15.8},     {2, 300, 1.8, 0.8, 6.8, 1.7, 0.6, 15.9},
        {2, 600, 2.0, 0.8, 7.9, 1.9, 0.5, 16.3},     {2, 800, 2.0, 0.8, 7.2, 2.0, 0.6, 16.5},
        {5, 600, 1.4, 0.6, 13.1, 1.3, 0.39, 39.5},   {5, 1200, 1.8, 0.6, 13.6, 1.7, 0.39, 40.4},
        {5, 4000, 2.0, 0.7, 13.6, 1.8, 0.39, 41.4},  {5, 6000, 2.1, 0.7, 12.4, 1.9, 0.37, 41.5},
        {10, 600, 1.2, 0.26, 19.1, 1.3, 0.21, 67},   {10, 2000, 2.0, 0.27, 21.6, 1.6, 0.2, 75},
    };
    for (double lambda : {1.0, 6.0})
        for (const auto& p : printed) {
            const std::size_t off = lambda == 1.0 ? 2 : 5;
            t.rows.push_back({p[0], static_cast<std::size_t>(p[1]), lambda, p[off], p[off + 1], p[off + 2]});
        }
    return t;
}

TableSpec make_table2() {
    TableSpec t{2, "theta2", 1, 1000, {}};
    const std::vector<std::array<double, 8>> printed{
        {5, 200, 1.7, 0.22, 6.8, 1.7, 0.28, 8.0},    {5, 400, 1.9, 0.12, 5.1, 1.8, 0.2, 6.6},
        {5, 800, 2.0, 0.09, 4.5, 1.9, 0.17, 5.6},    {10, 500, 1.7, 0.15, 12, 1.7, 0.21, 15},
        {10, 1000, 1.9, 0.08, 9.7, 1.8, 0.14, 12},   {10, 1500, 1.9, 0.06, 9.5, 1.9, 0.13, 11},
        {20, 1000, 1.8, 0.13, 25, 1.6, 0.16, 30},    {20, 2000, 1.9, 0.06, 19, 1.8, 0.11, 24},
        {20, 3000, 2.0, 0.04, 19, 1.9, 0.09, 22},
    };
    for (double sigma : {0.25, 0.5})
        for (const auto& p : printed) {
            const std::size_t off = sigma == 0.25 ? 2 : 5;
            t.rows.push_back({p[0], static_cast<std::size_t>(p[1]), sigma, p[off], p[off + 1], p[off + 2]});
        }
    return t;
}

TableSpec make_table3() {
    TableSpec t{3, "theta", 0, 500, {}};
    const std::vector<std::array<double, 8>> printed{
        {5, 600, 1.7, 0.53, 26, 1.6, 0.62, 37},      {5, 1200, 1.9, 0.54, 27, 1.8, 0.60, 40},
        {5, 1500, 1.9, 0.57, 26, 1.9, 0.66, 41},     {10, 1000, 1.6, 0.33, 51, 1.5, 0.40, 71},
        {10, 2000, 1.8, 0.34, 53, 1.7, 0.38, 79},    {10, 4000, 1.9, 0.35, 50, 1.9, 0.43, 85},
        {20, 2000, 1.6, 0.23, 104, 1.6, 0.27, 142},  {20, 4000, 1.8, 0.24, 106, 1.7, 0.28, 158},
        {20, 8000, 1.9, 0.23, 101, 1.9, 0.30, 170},
    };
    for (double alpha : {0.5, 1.0})
        for (const auto& p : printed) {
            const std::size_t off = alpha == 0.5 ? 2 : 5;
            t.rows.push_back({p[0], static_cast<std::size_t>(p[1]), alpha, p[off], p[off + 1], p[off + 2]});
        }
    return t;
}

}  // namespace

const TableSpec& table_spec(int id) {
    static const TableSpec t1 = make_table1();
    static const TableSpec t2 = make_table2();
    static const TableSpec t3 = make_table3();
    switch (id) {
        case 1: return t1;
        case 2: return t2;
        case 3: return t3;
        default: fail(ErrorKind::invalid_argument, "table id must be 1, 2 or 3");
    }
}

ExperimentConfig table_row_config(int id, const TableRow& row, std::size_t replications) {
    ExperimentConfig cfg;
    cfg.t_n = row.t_n;
    cfg.n = row.n;
    cfg.replications = replications;
    cfg.filter = FilterConfig::standard();
    cfg.estimator = EstimatorKind::closed_form;
    cfg.base_seed = 1000 * static_cast<std::uint64_t>(id) + static_cast<std::uint64_t>(row.n) +
                    static_cast<std::uint64_t>(std::llround(row.t_n * 1e6)) +
                    static_cast<std::uint64_t>(std::llround(row.extra * 1e3)) * 7919;
    switch (id) {
        case 1:
            cfg.model_name = "ou";
            cfg.theta_true = ParamVector::Zero(2);
            cfg.theta_true << 2.0, 0.0;
            cfg.sigma = 1.0;
            cfg.levy = CompoundPoisson{row.extra, ExponentialJumps{1.0}, JumpSign::positive_only};
            break;
        case 2:
            cfg.model_name = "cir";
            cfg.theta_true = ParamVector::Zero(2);
            cfg.theta_true << 0.1, 2.0;
            cfg.sigma = row.extra;
            cfg.levy = CompoundPoisson{1.0, ExponentialJumps{cir_jump_rate}, JumpSign::positive_only};
            break;
        case 3:
            cfg.model_name = "hyperbolic";
            cfg.theta_true = ParamVector::Constant(1, 2.0);
            cfg.sigma = 1.0;
            // standard symmetric stable variable, Lévy density C_α / |z|^{1+α}
            cfg.levy = AlphaStable{row.extra, std::pow(cms_levy_constant(row.extra), 1.0 / row.extra)};
            break;
        default: fail(ErrorKind::invalid_argument, "table id must be 1, 2 or 3");
    }
    return cfg;
}

TableCell evaluate_cell(const TableSpec& spec, const TableRow& row, ExperimentResult result, const Tolerances& tol) {
    TableCell cell;
    cell.row = row;
    const auto& p = result.parameters.at(spec.param_index);
    const double err = std::fabs(p.mean - row.paper_mean);
    cell.mean_ok = err <= tol.mean_abs || (p.mc_standard_error && err <= 2.0 * *p.mc_standard_error);
    cell.std_ok = p.std && std::fabs(*p.std - row.paper_std) <= tol.std_rel * row.paper_std;
    cell.jumps_ok = std::fabs(result.mean_rejected - row.paper_jumps) <= tol.jumps_rel * row.paper_jumps;
    cell.result = std::move(result);
    return cell;
}

TableReport reproduce_table(int id, std::optional<std::size_t> replications, int threads,
                            const std::vector<std::size_t>& rows) {
    const TableSpec& spec = table_spec(id);
    TableReport report{id, spec.param, {}};
    std::vector<std::size_t> which = rows;
    if (which.empty())
        for (std::size_t i = 0; i < spec.rows.size(); ++i) which.push_back(i);
    for (const std::size_t i : which) {
        require(i < spec.rows.size(), "reproduce_table: row index out of range");
        const TableRow& row = spec.rows[i];
        const auto cfg = table_row_config(id, row, replications.value_or(spec.default_replications));
        report.cells.push_back(evaluate_cell(spec, row, run_experiment(cfg, threads)));
    }
    return report;
}

void write_table_csv(std::ostream& os, const TableReport& report) {
    const auto old_precision = os.precision(6);
    os << "t_n,n,param,extra,mean,std,jumps_filt,paper_mean,paper_std,paper_jumps,pass\n";
    for (const auto& c : report.cells) {
        const auto& p = c.result.parameters.at(table_spec(report.id).param_index);
        os << c.row.t_n << ',' << c.row.n << ',' << report.param << ',' << c.row.extra << ',' << p.mean << ',';
        if (p.std) os << *p.std;
        os << ',' << c.result.mean_rejected << ',' << c.row.paper_mean << ',' << c.row.paper_std << ','
           << c.row.paper_jumps << ',' << (c.pass() ? "true" : "false") << '\n';
    }
    os.precision(old_precision);
}

}  // namespace levydrift

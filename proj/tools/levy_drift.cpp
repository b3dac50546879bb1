#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "levydrift/errors.hpp"
#include "levydrift/estimators.hpp"
#include "levydrift/harness.hpp"
#include "levydrift/inference.hpp"
#include "levydrift/jumpfilter.hpp"
#include "levydrift/model.hpp"
#include "levydrift/simulate.hpp"

namespace ld = levydrift;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_user = 1;
constexpr int exit_numeric = 2;

const char* levy_help =
    "Levy driver: none | cp:<rate>:exp:<eta> | cp:<rate>:const:<v> | cp:<rate>:normal:<m>:<s> "
    "(append :sym for two-sided sizes) | stable:<alpha>[:scale] | tstable:<alpha>:<lambda>:<C>";

double parse_double(const std::string& text, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size())
        ld::fail(ld::ErrorKind::invalid_argument, what + ": not a number: '" + text + "'");
    return v;
}

ld::ParamVector parse_theta(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(parse_double(item, "--theta"));
    ld::require(!values.empty(), "--theta needs at least one value");
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// Output stream for --out, stdout when empty.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_.open(path);
        if (!file_) ld::fail(ld::ErrorKind::io, "cannot write '" + path + "'");
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

struct ModelFlags {
    std::string model;
    std::string theta;
    double sigma = 1.0;
    std::string levy = "none";

    void add(CLI::App* cmd, bool theta_required) {
        cmd->add_option("--model", model, "Builtin model: ou | cir | hyperbolic")->required();
        auto* t = cmd->add_option("--theta", theta, "Drift parameter, comma separated (e.g. 2,0)");
        if (theta_required) t->required();
        cmd->add_option("--sigma", sigma, "Diffusion scale sigma (default 1)");
        cmd->add_option("--levy", levy, levy_help);
    }
    ld::ParametricModel build() const { return ld::make_model(model, sigma, ld::parse_levy(levy)); }
};

struct FilterFlags {
    std::optional<double> eps;
    std::optional<double> power;
    std::string cutoff;

    void add(CLI::App* cmd) {
        auto* e = cmd->add_option("--eps", eps, "Cutoff v_n = Delta^(1/2 - eps), eps in (0, 1/2)");
        auto* p = cmd->add_option("--vn-power", power, "Cutoff v_n = Delta^p, p in (0, 1/2] (default 1/3)");
        auto* v = cmd->add_option("--vn", cutoff, "Fixed cutoff v_n (a number or 'inf' to disable the filter)");
        e->excludes(p)->excludes(v);
        p->excludes(v);
    }
    ld::FilterConfig build() const {
        if (eps) return ld::FilterConfig::from_epsilon(*eps);
        if (power) return ld::FilterConfig::from_power(*power);
        if (!cutoff.empty()) {
            if (cutoff == "inf") return ld::FilterConfig::explicit_cutoff(std::numeric_limits<double>::infinity());
            return ld::FilterConfig::explicit_cutoff(parse_double(cutoff, "--vn"));
        }
        return ld::FilterConfig::standard();
    }
};

void print_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) os << "  " << std::setw(14) << m(r, c);
        os << '\n';
    }
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------

struct SimulateCmd {
    ModelFlags model;
    double t_end = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::size_t fine_steps = 0;
    std::optional<double> x0;
    bool decompose = false;
    std::string out;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("simulate", "Simulate a path and write the sampled observations as CSV `t,x[,xc,xj]`");
        model.add(cmd, true);
        cmd->add_option("--t-end", t_end, "Time horizon t_n")->required();
        cmd->add_option("--n", n, "Number of observation increments")->required();
        cmd->add_option("--seed", seed, "RNG seed")->required();
        cmd->add_option("--fine-steps", fine_steps, "Euler steps (default 50*n)");
        cmd->add_option("--x0", x0, "Initial value (default: ou 1, cir theta1/theta2, hyperbolic 0)");
        cmd->add_flag("--decompose", decompose, "Add accumulated continuous (xc) and jump (xj) parts");
        cmd->add_option("--out", out, "Output CSV (default stdout)");
    }
    void run() {
        const auto m = model.build();
        const auto theta = parse_theta(model.theta);
        ld::require(t_end > 0.0, "--t-end must be > 0");
        ld::require(n >= 1, "--n must be >= 1");
        const std::size_t fine = fine_steps ? fine_steps : 50 * n;
        const double start = x0 ? *x0 : ld::builtin_default_x0(model.model, theta);
        const auto path = ld::simulate_path(m, theta, start, t_end, fine, seed);
        std::vector<std::string> warnings;
        const auto sampled = ld::thin_path(path, n, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
        Output o(out);
        ld::write_path_csv(o.stream(), sampled, decompose);
    }
};

struct EstimateCmd {
    ModelFlags model;
    FilterFlags filter;
    std::string in;
    std::string method = "closed-form";
    std::string endpoint = "left";
    double level = 0.95;
    std::string out;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("estimate", "Filtered MLE of the drift from a CSV with columns t,x");
        model.add(cmd, false);
        filter.add(cmd);
        cmd->add_option("--in", in, "Input CSV with header containing t and x")->required();
        cmd->add_option("--method", method, "closed-form (builtin models) | generic")
            ->check(CLI::IsMember({"closed-form", "generic"}));
        cmd->add_option("--endpoint", endpoint, "State evaluation point in the sums: left | right")
            ->check(CLI::IsMember({"left", "right"}));
        cmd->add_option("--level", level, "Confidence level for the CLT intervals (default 0.95)");
        cmd->add_option("--out", out, "Write the report as JSON to this file");
    }
    int run() {
        const auto m = model.build();
        const auto obs = ld::read_observations_csv_file(in);
        const auto cfg = filter.build();
        const auto ep = endpoint == "right" ? ld::Endpoint::right : ld::Endpoint::left;
        ld::EstimateReport report;
        if (method == "generic") {
            ld::OptimizerSettings settings;
            settings.endpoint = ep;
            if (!model.theta.empty()) settings.start = parse_theta(model.theta);
            report = ld::fmle_generic(m, obs, cfg, settings);
        } else {
            report = ld::estimate(m, obs, cfg, ld::EstimatorKind::closed_form, ep);
        }
        if (m.in_bounds(report.theta_hat)) {
            const auto fisher = ld::fisher_ergodic(m, report.theta_hat, obs);
            report.fisher = fisher.matrix;
            for (const auto& w : fisher.warnings) report.warnings.push_back(w);
            if (fisher.inverse) report.ci = ld::confidence_intervals(report.theta_hat, fisher, obs.span(), level);
        }

        std::cout << "method      " << ld::to_string(report.method) << '\n'
                  << "converged   " << (report.converged ? "yes" : "no") << '\n'
                  << "iterations  " << report.iterations << '\n'
                  << "cutoff      " << report.cutoff << '\n'
                  << "rejected    " << report.rejected_count << '\n'
                  << "objective   " << report.objective_at_hat << '\n';
        for (Eigen::Index j = 0; j < report.theta_hat.size(); ++j) {
            std::cout << "theta" << j + 1 << "      " << report.theta_hat[j];
            if (report.ci) {
                const auto& iv = (*report.ci)[static_cast<std::size_t>(j)];
                std::cout << "   [" << iv.lo << ", " << iv.hi << "]";
            }
            std::cout << '\n';
        }
        for (const auto& w : report.warnings) std::cout << "warning     " << w << '\n';
        if (!out.empty()) {
            Output o(out);
            o.stream() << ld::to_json(report).dump(2) << '\n';
        }
        return report.converged ? exit_ok : exit_numeric;
    }
};

struct McCmd {
    std::string config;
    std::string out;
    int threads = 0;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand(
            "mc", "Monte Carlo experiment from a JSON config; CSV "
                  "`param,mean,std,mc_standard_error,coverage,mean_rejected,successes,failures`");
        cmd->add_option("--config", config, "Experiment config JSON (fields as in ExperimentConfig)")->required();
        cmd->add_option("--out", out, "Output CSV (default stdout)");
        cmd->add_option("--threads", threads, "Worker threads (default: all cores)");
    }
    void run() {
        std::ifstream in(config);
        if (!in) ld::fail(ld::ErrorKind::io, "cannot open '" + config + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            ld::fail(ld::ErrorKind::io, "config is not valid JSON: " + std::string(e.what()));
        }
        const auto cfg = ld::experiment_config_from_json(j);
        const auto result = ld::run_experiment(cfg, threads);
        Output o(out);
        ld::write_result_csv(o.stream(), result);
        if (result.failures)
            std::cerr << result.failures << " of " << cfg.replications << " replications failed\n";
    }
};

struct TableCmd {
    int id = 1;
    std::optional<std::size_t> reps;
    int threads = 0;
    std::vector<std::size_t> rows;
    std::string out;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand(
            "table", "Reproduce a published Monte Carlo table; CSV "
                     "`t_n,n,param,extra,mean,std,jumps_filt,paper_mean,paper_std,paper_jumps,pass`");
        cmd->add_option("--id", id, "Table: 1 (OU), 2 (CIR), 3 (hyperbolic)")->required()->check(CLI::Range(1, 3));
        cmd->add_option("--reps", reps, "Replications per row (default 500; 1000 for table 2)");
        cmd->add_option("--threads", threads, "Worker threads (default: all cores)");
        cmd->add_option("--rows", rows, "Zero-based row indices to run (default all)")->delimiter(',');
        cmd->add_option("--out", out, "Output CSV (default stdout)");
    }
    void run() {
        const auto report = ld::reproduce_table(id, reps, threads, rows);
        Output o(out);
        ld::write_table_csv(o.stream(), report);
    }
};

struct FisherCmd {
    ModelFlags model;
    std::string in;
    std::string out;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand("fisher", "Ergodic Fisher information estimate at --theta from a CSV path");
        model.add(cmd, true);
        cmd->add_option("--in", in, "Input CSV with t,x")->required();
        cmd->add_option("--out", out, "Write JSON {matrix, inverse, condition_number} to this file");
    }
    void run() {
        const auto m = model.build();
        const auto obs = ld::read_observations_csv_file(in);
        const auto f = ld::fisher_ergodic(m, parse_theta(model.theta), obs);
        std::cout << std::setprecision(10) << "fisher matrix (t_n = " << f.sample_span << ")\n";
        print_matrix(std::cout, f.matrix);
        std::cout << "condition number " << f.condition_number << '\n';
        for (const auto& w : f.warnings) std::cout << "warning: " << w << '\n';
        if (!out.empty()) {
            Output o(out);
            nlohmann::json j{{"matrix", matrix_json(f.matrix)},
                             {"condition_number", f.condition_number},
                             {"sample_span", f.sample_span},
                             {"skipped", f.skipped},
                             {"warnings", f.warnings}};
            j["inverse"] = f.inverse ? matrix_json(*f.inverse) : nlohmann::json(nullptr);
            o.stream() << j.dump(2) << '\n';
        }
    }
};

struct CheckCmd {
    ModelFlags model;
    int probes = 200;
    std::uint64_t seed = 1;
    std::optional<std::size_t> n;
    std::optional<double> delta;
    double eps = 1.0 / 6.0;

    void add(CLI::App& app) {
        auto* cmd = app.add_subcommand(
            "check", "Spot-check model regularity; with --n and --delta also evaluate the rate conditions");
        model.add(cmd, false);
        cmd->add_option("--probes", probes, "Random (theta, x) probes (default 200)");
        cmd->add_option("--seed", seed, "Probe seed");
        cmd->add_option("--n", n, "Number of observations for the rate conditions");
        cmd->add_option("--delta", delta, "Sampling step Delta_n for the rate conditions");
        cmd->add_option("--eps", eps, "Filter epsilon for the rate conditions (default 1/6)");
    }
    int run() {
        const auto m = model.build();
        const auto r = ld::check_model(m, probes, seed);
        std::cout << "probes                 " << r.probes << '\n'
                  << "max gradient error     " << r.max_gradient_error << (r.gradient_ok ? "  ok" : "  FAIL") << '\n'
                  << "max hessian asymmetry  " << r.max_hessian_asymmetry << (r.hessian_ok ? "  ok" : "  FAIL")
                  << '\n'
                  << "min sigma^2            " << r.min_sigma_squared << " at x = " << r.argmin_sigma_x
                  << (r.nondegenerate_ok ? "  ok" : "  FAIL") << '\n'
                  << "min |gamma|            " << r.min_abs_gamma << '\n';
        for (const auto& note : r.notes) std::cout << "note: " << note << '\n';
        if (n && delta) {
            const auto rc = ld::rate_condition_check(*n, *delta, eps, m.levy);
            std::cout << "rate conditions (v_n = " << rc.cutoff << ")\n";
            for (std::size_t i = 0; i < rc.terms.size(); ++i) {
                const auto& t = rc.terms[i];
                std::cout << "  " << std::left << std::setw(52) << t.expression << std::right << std::setw(14)
                          << t.value << "  " << ld::to_string(t.verdict)
                          << (rc.binding && *rc.binding == i ? "  (binding)" : "") << '\n';
            }
            for (const auto& note : rc.notes) std::cout << "note: " << note << '\n';
        } else if (n || delta) {
            ld::fail(ld::ErrorKind::invalid_argument, "rate conditions need both --n and --delta");
        }
        return exit_ok;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drift estimation for jump diffusions from discrete observations, with threshold jump filtering."};
    app.require_subcommand(1);
    app.footer(std::string("\n") + levy_help +
               "\nExit codes: 0 success, 1 usage or input error, 2 numerical failure.");

    SimulateCmd simulate;
    EstimateCmd estimate;
    McCmd mc;
    TableCmd table;
    FisherCmd fisher;
    CheckCmd check;
    simulate.add(app);
    estimate.add(app);
    mc.add(app);
    table.add(app);
    fisher.add(app);
    check.add(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_user;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "simulate") simulate.run();
        else if (name == "estimate") return estimate.run();
        else if (name == "mc") mc.run();
        else if (name == "table") table.run();
        else if (name == "fisher") fisher.run();
        else if (name == "check") return check.run();
        return exit_ok;
    } catch (const ld::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_user_error() ? exit_user : exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_numeric;
    }
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "levydrift/estimators.hpp"
#include "levydrift/jumpfilter.hpp"
#include "levydrift/likelihood.hpp"
#include "levydrift/model.hpp"

namespace levydrift {

struct ExperimentConfig {
    std::string model_name = "ou";
    ParamVector theta_true;
    double sigma = 1.0;
    LevySpec levy = NoJumps{};
    std::optional<double> x0;  // default: builtin_default_x0
    double t_n = 10.0;
    std::size_t n = 1000;
    std::size_t fine_steps = 0;  // 0 → 50·n
    FilterConfig filter = FilterConfig::standard();
    std::size_t replications = 100;
    std::uint64_t base_seed = 1;
    EstimatorKind estimator = EstimatorKind::closed_form;
    Endpoint endpoint = Endpoint::left;
    double burn_in_fraction = 0.1;  // of t_n, simulated and discarded
    // When set, each replication also builds CLT intervals at this level and
    // the result reports empirical coverage of theta_true.
    std::optional<double> coverage_level;

    std::size_t effective_fine_steps() const noexcept { return fine_steps ? fine_steps : 50 * n; }
    double effective_x0() const;
    // Throws invalid_argument on inconsistent fields.
    void validate() const;
};

// Stationary-ish starting value: OU 1, CIR θ₁/θ₂, hyperbolic 0.
double builtin_default_x0(const std::string& model_name, const ParamVector& theta);

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct ParameterSummary {
    double mean = 0.0;
    std::optional<double> std;                // divisor R−1; absent for one success
    std::optional<double> mc_standard_error;  // std / √R
    std::optional<double> coverage;

    bool operator==(const ParameterSummary&) const = default;
};

struct ExperimentResult {
    std::vector<ParameterSummary> parameters;
    double mean_rejected = 0.0;
    std::size_t successes = 0;
    std::size_t failures = 0;
    std::map<std::string, std::size_t> failure_census;  // reason → count
    double wall_time = 0.0;                             // seconds; not part of equality

    bool operator==(const ExperimentResult& other) const {
        return parameters == other.parameters && mean_rejected == other.mean_rejected &&
               successes == other.successes && failures == other.failures &&
               failure_census == other.failure_census;
    }
};

nlohmann::json to_json(const ExperimentResult& result);
// CSV `param,mean,std,mc_standard_error,coverage,mean_rejected,successes,failures`.
void write_result_csv(std::ostream& os, const ExperimentResult& result);

struct ReplicationOutcome {
    std::optional<ParamVector> theta_hat;
    std::size_t rejected = 0;
    std::vector<bool> covered;  // per parameter, when coverage_level is set
    std::string failure;        // empty on success
};

// One replication: derive seed, simulate burn-in and path, subsample, estimate.
ReplicationOutcome run_replication(const ExperimentConfig& cfg, std::size_t index);

// Aggregates outcomes in index order. Throws experiment_failed when none succeeded.
ExperimentResult aggregate(const ExperimentConfig& cfg, const std::vector<ReplicationOutcome>& outcomes);

// OpenMP over replications; `threads` = 0 uses the runtime default.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 0);
// Single-threaded reference with the same numbers.
ExperimentResult run_experiment_serial(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Published tables
// ---------------------------------------------------------------------------

struct TableRow {
    double t_n = 0.0;
    std::size_t n = 0;
    double extra = 0.0;  // λ (table 1), σ (table 2) or α (table 3)
    double paper_mean = 0.0;
    double paper_std = 0.0;
    double paper_jumps = 0.0;
};

struct TableSpec {
    int id = 0;
    std::string param;       // reported parameter, e.g. "theta1"
    std::size_t param_index = 0;
    std::size_t default_replications = 500;
    std::vector<TableRow> rows;
};

const TableSpec& table_spec(int id);
ExperimentConfig table_row_config(int id, const TableRow& row, std::size_t replications);

struct TableCell {
    TableRow row;
    ExperimentResult result;
    bool mean_ok = false;
    bool std_ok = false;
    bool jumps_ok = false;
    bool pass() const noexcept { return mean_ok && std_ok && jumps_ok; }
};

struct Tolerances {
    double mean_abs = 0.1;  // also passes within 2 MC standard errors
    double std_rel = 0.3;
    double jumps_rel = 0.3;
};

TableCell evaluate_cell(const TableSpec& spec, const TableRow& row, ExperimentResult result,
                        const Tolerances& tol = {});

struct TableReport {
    int id = 0;
    std::string param;
    std::vector<TableCell> cells;
};

// Runs `rows` (all rows when empty) of a table.
TableReport reproduce_table(int id, std::optional<std::size_t> replications = std::nullopt, int threads = 0,
                            const std::vector<std::size_t>& rows = {});

// `t_n,n,param,extra,mean,std,jumps_filt,paper_mean,paper_std,paper_jumps,pass`
void write_table_csv(std::ostream& os, const TableReport& report);

}  // namespace levydrift

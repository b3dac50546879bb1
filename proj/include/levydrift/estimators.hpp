#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "levydrift/jumpfilter.hpp"
#include "levydrift/likelihood.hpp"
#include "levydrift/model.hpp"
#include "levydrift/simulate.hpp"

namespace levydrift {

enum class EstimationMethod { closed_form, newton, nelder_mead };

std::string to_string(EstimationMethod method);

struct EstimateReport {
    ParamVector theta_hat;
    std::size_t rejected_count = 0;
    double cutoff = 0.0;
    double objective_at_hat = 0.0;
    EstimationMethod method = EstimationMethod::closed_form;
    int iterations = 0;
    bool converged = false;
    std::optional<Eigen::MatrixXd> fisher;
    std::optional<std::vector<Interval>> ci;
    std::vector<std::string> warnings;
};

nlohmann::json to_json(const EstimateReport& report);

// I_n(X, p) = Σ X_{t_i}^p Δᵢ Id (right endpoint by default).
double functional_In(const Observations& obs, double p, Endpoint endpoint = Endpoint::right);

// Closed-form solutions of the normal equations of the filtered likelihood
// for the builtin linear-in-θ models. The endpoint selects where the state
// factors inside the sums are evaluated; see README for the convention.
// `objective_at_hat` is reported for unit diffusion scale (σ = 1).
EstimateReport fmle_ou(const Observations& obs, const FilterConfig& cfg, Endpoint endpoint = Endpoint::left);
EstimateReport fmle_cir(const Observations& obs, const FilterConfig& cfg, Endpoint endpoint = Endpoint::left);
EstimateReport fmle_hyperbolic(const Observations& obs, const FilterConfig& cfg,
                               Endpoint endpoint = Endpoint::left);

struct OptimizerSettings {
    enum class Strategy { automatic, newton_only, simplex_only };
    Strategy strategy = Strategy::automatic;
    std::optional<ParamVector> start;  // default θ = 0 projected into bounds
    int max_newton_iterations = 200;
    int max_simplex_iterations = 2000;
    double gradient_tolerance = 1e-8;  // relative to 1 + |ℓ|
    double simplex_tolerance = 1e-9;   // simplex diameter
    int max_halvings = 30;
    Endpoint endpoint = Endpoint::left;
};

// Maximizes the filtered log-likelihood: damped projected Newton, falling back
// to Nelder–Mead when the Hessian is indefinite.
EstimateReport fmle_generic(const ParametricModel& model, const Observations& obs, const FilterConfig& cfg,
                            const OptimizerSettings& settings = {});
EstimateReport fmle_generic(const LikelihoodContext& ctx, const OptimizerSettings& settings = {});

enum class EstimatorKind { closed_form, generic };

// Closed form for builtin models when requested, generic maximization otherwise.
EstimateReport estimate(const ParametricModel& model, const Observations& obs, const FilterConfig& cfg,
                        EstimatorKind kind, Endpoint endpoint = Endpoint::left);

}  // namespace levydrift

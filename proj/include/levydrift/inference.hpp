#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "levydrift/model.hpp"
#include "levydrift/simulate.hpp"

namespace levydrift {

// Ergodic estimate of I(θ) = π(∇b ∇bᵀ / σ²).
struct FisherEstimate {
    Eigen::MatrixXd matrix;
    std::optional<Eigen::MatrixXd> inverse;  // absent when ill-conditioned
    double condition_number = 0.0;
    double sample_span = 0.0;
    std::size_t skipped = 0;  // points with σ = 0
    std::vector<std::string> warnings;
};

inline constexpr double max_fisher_condition = 1e10;

// (1/t_n) Σ [∇b ∇bᵀ / σ²](θ, X_{t_{i−1}}) Δᵢ Id
FisherEstimate fisher_ergodic(const ParametricModel& model, const ParamVector& theta, const Observations& obs);

// Standard normal quantile, p ∈ (0, 1).
double normal_quantile(double p);

// θ̂_j ± z_{(1+level)/2} √(I⁻¹_jj / t_n). level ∈ [0, 1).
std::vector<Interval> confidence_intervals(const ParamVector& theta_hat, const FisherEstimate& fisher, double t_n,
                                           double level);

enum class RateVerdict { small, moderate, large };
std::string to_string(RateVerdict verdict);

struct RateTerm {
    std::string expression;
    double value = 0.0;
    RateVerdict verdict = RateVerdict::moderate;
};

struct RateConditionReport {
    double cutoff = 0.0;  // v_n = Δ^{1/2−ε}
    std::vector<RateTerm> terms;
    std::optional<std::size_t> binding;  // index into terms of the reduced condition
    std::vector<std::string> notes;

    const RateTerm* binding_term() const { return binding ? &terms[*binding] : nullptr; }
};

// Advisory: values below 0.1 count as small, above 1 as large.
RateVerdict classify_rate(double value);

// Evaluates the left-hand sides of the asymptotic conditions at (n, Δ_n, ε).
// The jump coefficient is taken as γ ≡ 1.
RateConditionReport rate_condition_check(std::size_t n, double delta_n, double epsilon, const LevySpec& levy);

// ν({0 < |z| ≤ a}) and ∫_{|z| < a} |z| ν(dz) and ν({|z| ≥ a}) for a Lévy spec.
double levy_mass_below(const LevySpec& levy, double a);
double levy_abs_moment_below(const LevySpec& levy, double a);
double levy_mass_above(const LevySpec& levy, double a);

}  // namespace levydrift

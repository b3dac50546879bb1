#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace levydrift {

// Drift parameter θ. Length must equal the model's parameter dimension.
using ParamVector = Eigen::VectorXd;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    double clamp(double x) const noexcept { return x < lo ? lo : (x > hi ? hi : x); }
    bool operator==(const Interval&) const = default;
};

// ---------------------------------------------------------------------------
// Lévy measure specifications
// ---------------------------------------------------------------------------

struct ExponentialJumps {
    double rate = 1.0;
};
struct GaussianJumps {
    double mean = 0.0;
    double std = 1.0;
};
struct ConstantJumps {
    double value = 1.0;
};
using JumpLaw = std::variant<ExponentialJumps, GaussianJumps, ConstantJumps>;

enum class JumpSign { positive_only, two_sided };

// Finite-activity driver: Poisson(λ) arrivals with i.i.d. sizes.
struct CompoundPoisson {
    double intensity = 1.0;
    JumpLaw jump_law = ExponentialJumps{};
    JumpSign sign = JumpSign::positive_only;
};

// Symmetric α-stable driver with Lévy density scale^α / |z|^{1+α}.
struct AlphaStable {
    double alpha = 1.0;
    double scale = 1.0;
};

// Symmetric tempered stable driver, Lévy density C |z|^{-(1+α)} e^{-λ|z|}.
struct TemperedStable {
    double alpha = 0.5;
    double tempering = 1.0;
    double normalizer = 1.0;
};

struct NoJumps {};

using LevySpec = std::variant<NoJumps, CompoundPoisson, AlphaStable, TemperedStable>;

// Throws invalid_argument when the spec violates its parameter ranges.
void validate(const LevySpec& levy);

bool has_finite_activity(const LevySpec& levy);

// Parses the CLI mini-grammar:
//   none | cp:<λ>:exp:<η> | cp:<λ>:const:<v> | cp:<λ>:normal:<m>:<s>
//   | stable:<α>[:scale] | tstable:<α>:<λ>:<C>
// A trailing ":sym" on a cp spec makes the jump sign two-sided.
LevySpec parse_levy(std::string_view text);
std::string format_levy(const LevySpec& levy);

// ---------------------------------------------------------------------------
// Model components
// ---------------------------------------------------------------------------

using DriftFn = std::function<double(const ParamVector&, double)>;
using DriftGradFn = std::function<Eigen::VectorXd(const ParamVector&, double)>;
using DriftHessFn = std::function<Eigen::MatrixXd(const ParamVector&, double)>;
using StateFn = std::function<double(double)>;

struct DriftSpec {
    DriftFn eval;
    DriftGradFn grad_theta;  // optional; central differences when empty
    DriftHessFn hess_theta;  // optional
    bool has_closed_gradient = false;
};

struct DiffusionSpec {
    StateFn eval;
    double lower_bound = 0.0;  // α in σ²(x) ≥ α; 0 means no uniform bound
};

class ParametricModel {
public:
    std::string name;
    DriftSpec drift;
    DiffusionSpec diffusion;
    StateFn jump_coeff;
    LevySpec levy;
    int param_dim = 1;
    std::vector<Interval> param_bounds;
    // Observation points where σ vanishes are skipped (with a count) instead of
    // raising. Set for models whose diffusion degenerates at a state boundary.
    bool skip_degenerate_points = false;

    double drift_at(const ParamVector& theta, double x) const { return drift.eval(theta, x); }
    Eigen::VectorXd drift_gradient(const ParamVector& theta, double x) const;
    Eigen::MatrixXd drift_hessian(const ParamVector& theta, double x) const;
    double sigma_at(double x) const { return diffusion.eval(x); }
    double gamma_at(double x) const { return jump_coeff ? jump_coeff(x) : 1.0; }

    bool in_bounds(const ParamVector& theta) const;
    ParamVector project(const ParamVector& theta) const;
    // Throws invalid_argument on wrong length or out-of-bounds coordinates.
    void validate_theta(const ParamVector& theta) const;
};

inline constexpr double default_bound = 50.0;

std::vector<Interval> default_bounds(int dim);

// dX = (θ₂ − θ₁X) dt + σ dW + dL
ParametricModel ou_model(double sigma);
// dX = (θ₁ − θ₂X) dt + σ√X⁺ dW + dL, full truncation at X ≤ 0
ParametricModel cir_model(double sigma);
// dX = −θX/√(1+X²) dt + σ dW + dL
ParametricModel hyperbolic_model(double sigma);

// Serializable description of a builtin model.
struct ModelSpec {
    std::string name;
    double sigma = 1.0;
    LevySpec levy = NoJumps{};
    std::vector<Interval> bounds;  // empty → defaults
};

ParametricModel make_model(const ModelSpec& spec);
ParametricModel make_model(std::string_view name, double sigma, const LevySpec& levy = NoJumps{});
int builtin_param_dim(std::string_view name);

// ---------------------------------------------------------------------------
// Numerical spot checks of the regularity assumptions
// ---------------------------------------------------------------------------

struct ModelCheckReport {
    int probes = 0;
    double max_gradient_error = 0.0;  // |grad − FD|∞ / (1 + |grad|∞)
    double max_hessian_asymmetry = 0.0;
    double min_sigma_squared = 0.0;
    double argmin_sigma_x = 0.0;
    double min_abs_gamma = 0.0;
    bool gradient_ok = true;
    bool hessian_ok = true;
    bool nondegenerate_ok = true;
    std::vector<std::string> notes;

    bool passed() const noexcept { return gradient_ok && hessian_ok && nondegenerate_ok; }
};

struct ModelCheckOptions {
    double x_lo = -5.0;
    double x_hi = 5.0;
    double gradient_tolerance = 1e-5;
    double theta_range = 10.0;  // probes θ in bounds ∩ [−range, range]
};

ModelCheckReport check_model(const ParametricModel& model, int probe_count, std::uint64_t seed,
                             const ModelCheckOptions& options = {});

// Central finite differences with step 1e-6·(1+|θᵢ|).
Eigen::VectorXd finite_difference_gradient(const DriftFn& f, const ParamVector& theta, double x);

}  // namespace levydrift

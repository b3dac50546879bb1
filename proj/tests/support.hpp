#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levydrift/model.hpp"
#include "levydrift/rng.hpp"
#include "levydrift/simulate.hpp"

namespace levydrift::testing {

inline Observations observations(std::vector<double> times, std::vector<double> values) {
    return Observations::from_series(std::move(times), std::move(values));
}

inline Observations unit_grid(std::vector<double> values, double step = 1.0) {
    std::vector<double> times(values.size());
    for (std::size_t i = 0; i < times.size(); ++i) times[i] = step * static_cast<double>(i);
    return observations(std::move(times), std::move(values));
}

inline ParamVector theta(std::initializer_list<double> values) {
    ParamVector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

inline ParametricModel ou_with_jumps(double sigma = 1.0, double lambda = 1.0) {
    return make_model("ou", sigma, CompoundPoisson{lambda, ExponentialJumps{1.0}, JumpSign::positive_only});
}

inline ParametricModel cir_with_jumps(double sigma = 0.25, double rate = 0.6) {
    return make_model("cir", sigma, CompoundPoisson{1.0, ExponentialJumps{rate}, JumpSign::positive_only});
}

inline ParametricModel hyperbolic_with_jumps(double alpha = 0.5) {
    return make_model("hyperbolic", 1.0, AlphaStable{alpha, 1.0});
}

// Builtin model, true θ, start value and horizon used by the simulated-data tests.
struct Scenario {
    ParametricModel model;
    ParamVector theta_true;
    double x0;
};

inline std::vector<Scenario> builtin_scenarios() {
    return {{ou_with_jumps(), theta({2.0, 0.0}), 1.0},
            {cir_with_jumps(), theta({0.1, 2.0}), 1.0},
            {hyperbolic_with_jumps(), theta({2.0}), 0.0}};
}

// Random θ uniformly inside [lo, hi]^d.
inline ParamVector random_theta(int d, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    ParamVector v(d);
    for (int i = 0; i < d; ++i) v[i] = u(rng);
    return v;
}

// K_α = ∫(1 − cos u)|u|^{−1−α} du, so E cos(tL_h) = exp(−h·scale^α|t|^α·K_α).
inline double stable_exponent_constant(double alpha) {
    if (alpha == 1.0) return std::numbers::pi;
    return -2.0 * std::tgamma(-alpha) * std::cos(std::numbers::pi * alpha / 2.0);
}

// Exact E|L_h| for symmetric tempered stable, E|X| = (2/π)∫(1 − φ(t))/t² dt with the closed-form exponent.
// Not the first-order h∫|z|ν(dz), which ignores cancellation between jumps of opposite sign.
inline double tempered_stable_abs_mean(const TemperedStable& ts, double h) {
    const double a = ts.alpha, lam = ts.tempering, c = ts.normalizer;
    auto exponent = [&](double t) {
        return 2.0 * c * std::tgamma(-a) *
               (std::pow(lam * lam + t * t, a / 2.0) * std::cos(a * std::atan(t / lam)) - std::pow(lam, a));
    };
    auto integrand = [&](double t) {
        if (t < 1e-150) return h * c * std::tgamma(2.0 - a) * std::pow(lam, a - 2.0);
        return -std::expm1(h * exponent(t)) / (t * t);
    };
    boost::math::quadrature::tanh_sinh<double> head;
    boost::math::quadrature::exp_sinh<double> tail;
    return 2.0 / std::numbers::pi *
           (head.integrate(integrand, 0.0, 1.0) + tail.integrate(integrand, 1.0, std::numeric_limits<double>::infinity()));
}

// h∫|z|ν(dz) by quadrature, the small-h limit of E|L_h|.
inline double tempered_stable_first_order(const TemperedStable& ts, double h) {
    auto g = [&](double z) { return ts.normalizer * std::pow(z, -ts.alpha) * std::exp(-ts.tempering * z); };
    boost::math::quadrature::tanh_sinh<double> head;
    boost::math::quadrature::exp_sinh<double> tail;
    return 2.0 * h * (head.integrate(g, 0.0, 1.0) + tail.integrate(g, 1.0, std::numeric_limits<double>::infinity()));
}

}  // namespace levydrift::testing

#include "levydrift/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "levydrift/errors.hpp"
#include "levydrift/numeric.hpp"

namespace levydrift {

std::string to_string(EstimationMethod method) {
    switch (method) {
        case EstimationMethod::closed_form: return "closed-form";
        case EstimationMethod::newton: return "newton";
        case EstimationMethod::nelder_mead: return "nelder-mead";
    }
    return "unknown";
}

nlohmann::json to_json(const EstimateReport& report) {
    nlohmann::json j;
    j["theta_hat"] = std::vector<double>(report.theta_hat.data(), report.theta_hat.data() + report.theta_hat.size());
    j["rejected_count"] = report.rejected_count;
    j["cutoff"] = report.cutoff;
    j["objective_at_hat"] = report.objective_at_hat;
    j["method"] = to_string(report.method);
    j["iterations"] = report.iterations;
    j["converged"] = report.converged;
    if (report.fisher) {
        const auto& f = *report.fisher;
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < f.rows(); ++r) {
            std::vector<double> row(static_cast<std::size_t>(f.cols()));
            for (Eigen::Index c = 0; c < f.cols(); ++c) row[static_cast<std::size_t>(c)] = f(r, c);
            rows.push_back(row);
        }
        j["fisher"] = rows;
    } else {
        j["fisher"] = nullptr;
    }
    if (report.ci) {
        nlohmann::json ci = nlohmann::json::array();
        for (const auto& iv : *report.ci) ci.push_back({iv.lo, iv.hi});
        j["ci"] = ci;
    } else {
        j["ci"] = nullptr;
    }
    j["warnings"] = report.warnings;
    return j;
}

double functional_In(const Observations& obs, double p, Endpoint endpoint) {
    CompensatedSum sum;
    for (std::size_t i = 1; i <= obs.size(); ++i) {
        const std::size_t at = endpoint == Endpoint::right ? i : i - 1;
        const double x = obs.values[at];
        if (p < 0.0 && x == 0.0)
            fail(ErrorKind::singularity,
                 "I_n(X, p) with p < 0: zero observation at index " + std::to_string(at), at);
        const double term = p == 0.0 ? 1.0 : std::pow(x, p);
        if (!std::isfinite(term))
            fail(ErrorKind::singularity, "I_n(X, p): non-finite power at index " + std::to_string(at), at);
        sum += term * obs.step(i);
    }
    return sum.value();
}

namespace {

// Σ g(X) Δᵢ X 1{|Δᵢ X| ≤ v} with g evaluated at the chosen endpoint.
template <class F>
double kept_sum(const Observations& obs, const FilterResult& filter, Endpoint endpoint, F&& g) {
    CompensatedSum sum;
    for (std::size_t i = 1; i <= obs.size(); ++i) {
        if (!filter.kept(i)) continue;
        const double x = obs.values[endpoint == Endpoint::right ? i : i - 1];
        sum += g(x) * obs.increment(i);
    }
    return sum.value();
}

EstimateReport closed_form_report(const ParametricModel& unit_model, const Observations& obs,
                                  const FilterResult& filter, Endpoint endpoint, ParamVector theta) {
    EstimateReport r;
    r.theta_hat = std::move(theta);
    r.rejected_count = filter.rejected_count;
    r.cutoff = filter.cutoff;
    r.method = EstimationMethod::closed_form;
    r.iterations = 0;
    r.converged = true;
    for (Eigen::Index j = 0; j < r.theta_hat.size(); ++j)
        if (!std::isfinite(r.theta_hat[j])) fail(ErrorKind::degenerate_data, "closed-form estimate is not finite");
    const LikelihoodContext ctx(unit_model, obs, filter, endpoint);
    r.objective_at_hat = filtered_loglik(ctx, r.theta_hat);
    if (ctx.skipped_count() > 0)
        r.warnings.push_back(std::to_string(ctx.skipped_count()) + " increments skipped (vanishing diffusion)");
    return r;
}

constexpr double degenerate_tolerance = 1e-12;

}  // namespace

EstimateReport fmle_ou(const Observations& obs, const FilterConfig& cfg, Endpoint endpoint) {
    const FilterResult filter = apply_filter(obs, cfg);
    const Endpoint state = endpoint;
    const double t = obs.span();
    const double i1 = functional_In(obs, 1.0, state);
    const double i2 = functional_In(obs, 2.0, state);
    const double s0 = kept_sum(obs, filter, state, [](double) { return 1.0; });
    const double s1 = kept_sum(obs, filter, state, [](double x) { return x; });

    // θ₁ I₂ − θ₂ I₁ = −S₁,  −θ₁ I₁ + θ₂ t = S₀
    const double shrink = 1.0 - i1 * i1 / (t * i2);
    if (!(i2 > 0.0) || !(std::fabs(shrink) > degenerate_tolerance))
        fail(ErrorKind::degenerate_data, "OU normal equations are singular (constant or degenerate path)");
    ParamVector theta(2);
    theta[0] = (i1 * s0 - t * s1) / (t * i2) / shrink;
    theta[1] = (s0 + theta[0] * i1) / t;
    return closed_form_report(ou_model(1.0), obs, filter, endpoint, std::move(theta));
}

EstimateReport fmle_cir(const Observations& obs, const FilterConfig& cfg, Endpoint endpoint) {
    const FilterResult filter = apply_filter(obs, cfg);
    for (std::size_t i = 1; i <= obs.size(); ++i) {
        const std::size_t at = endpoint == Endpoint::right ? i : i - 1;
        if (!(obs.values[at] > 0.0))
            fail(ErrorKind::singularity, "CIR estimator needs positive observations; index " + std::to_string(at) +
                                             " is " + std::to_string(obs.values[at]),
                 at);
    }
    const double t = obs.span();
    const double i_inv = functional_In(obs, -1.0, endpoint);
    const double i1 = functional_In(obs, 1.0, endpoint);
    const double s_inv = kept_sum(obs, filter, endpoint, [](double x) { return 1.0 / x; });
    const double s0 = kept_sum(obs, filter, endpoint, [](double) { return 1.0; });

    // θ₁ I₋₁ − θ₂ t = S₋₁,  θ₁ t − θ₂ I₁ = S₀
    const double det = i_inv * i1 - t * t;
    if (!(std::fabs(det) > degenerate_tolerance * i_inv * i1))
        fail(ErrorKind::degenerate_data, "CIR normal equations are singular (constant or degenerate path)");
    ParamVector theta(2);
    theta[1] = (t * s_inv - i_inv * s0) / det;
    theta[0] = (theta[1] * t + s_inv) / i_inv;
    return closed_form_report(cir_model(1.0), obs, filter, endpoint, std::move(theta));
}

EstimateReport fmle_hyperbolic(const Observations& obs, const FilterConfig& cfg, Endpoint endpoint) {
    const FilterResult filter = apply_filter(obs, cfg);
    const double num = kept_sum(obs, filter, endpoint, [](double x) { return x / std::sqrt(1.0 + x * x); });
    CompensatedSum den;
    for (std::size_t i = 1; i <= obs.size(); ++i) {
        const double x = obs.values[endpoint == Endpoint::right ? i : i - 1];
        den += x * x / (1.0 + x * x) * obs.step(i);
    }
    if (!(den.value() > degenerate_tolerance * obs.span()))
        fail(ErrorKind::degenerate_data, "hyperbolic estimator: denominator vanishes (path stays at 0)");
    ParamVector theta(1);
    theta[0] = -num / den.value();
    return closed_form_report(hyperbolic_model(1.0), obs, filter, endpoint, std::move(theta));
}

// ---------------------------------------------------------------------------
// Generic maximization
// ---------------------------------------------------------------------------

namespace {

// Gradient with components that push against an active bound removed.
Eigen::VectorXd projected_gradient(const ParametricModel& model, const ParamVector& theta,
                                   const Eigen::VectorXd& grad) {
    Eigen::VectorXd g = grad;
    for (int i = 0; i < model.param_dim; ++i) {
        const auto& b = model.param_bounds[i];
        if ((theta[i] <= b.lo && g[i] < 0.0) || (theta[i] >= b.hi && g[i] > 0.0)) g[i] = 0.0;
    }
    return g;
}

struct SimplexOutcome {
    ParamVector best;
    double value;
    int iterations;
    bool converged;
};

// Nelder–Mead on −ℓ with standard coefficients, points projected into bounds.
SimplexOutcome nelder_mead(const LikelihoodContext& ctx, const ParamVector& start, const OptimizerSettings& s) {
    const auto& model = ctx.model();
    const int d = model.param_dim;
    auto objective = [&](const ParamVector& th) {
        const double v = -filtered_loglik(ctx, th);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<ParamVector> pts(static_cast<std::size_t>(d + 1), start);
    std::vector<double> vals(static_cast<std::size_t>(d + 1));
    for (int i = 0; i < d; ++i) {
        pts[i + 1][i] += 0.1 * (1.0 + std::fabs(start[i]));
        pts[i + 1] = model.project(pts[i + 1]);
        if (pts[i + 1][i] == start[i]) pts[i + 1][i] -= 0.1 * (1.0 + std::fabs(start[i]));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = objective(pts[i]);

    std::vector<std::size_t> order(pts.size());
    int iter = 0;
    bool converged = false;
    for (; iter < s.max_simplex_iterations; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        double diameter = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i)
            diameter = std::max(diameter, (pts[order[i]] - pts[order[0]]).cwiseAbs().maxCoeff());
        if (diameter < s.simplex_tolerance) {
            converged = true;
            break;
        }
        const std::size_t worst = order.back();
        const std::size_t second = order[order.size() - 2];
        ParamVector centroid = ParamVector::Zero(d);
        for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += pts[order[i]];
        centroid /= d;

        const ParamVector reflected = model.project(centroid + (centroid - pts[worst]));
        const double fr = objective(reflected);
        if (fr < vals[order[0]]) {
            const ParamVector expanded = model.project(centroid + 2.0 * (centroid - pts[worst]));
            const double fe = objective(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = fr;
        } else {
            const bool outside = fr < vals[worst];
            const ParamVector contracted =
                outside ? ParamVector(centroid + 0.5 * (reflected - centroid))
                        : ParamVector(centroid + 0.5 * (pts[worst] - centroid));
            const double fc = objective(contracted);
            if (fc < std::min(fr, vals[worst])) {
                pts[worst] = contracted;
                vals[worst] = fc;
            } else {
                const ParamVector& best = pts[order[0]];
                for (std::size_t i = 1; i < order.size(); ++i) {
                    pts[order[i]] = best + 0.5 * (pts[order[i]] - best);
                    vals[order[i]] = objective(pts[order[i]]);
                }
            }
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    return {pts[best], -vals[best], iter, converged};
}

}  // namespace

EstimateReport fmle_generic(const LikelihoodContext& ctx, const OptimizerSettings& settings) {
    const auto& model = ctx.model();
    const int d = model.param_dim;
    ParamVector theta = settings.start ? *settings.start : ParamVector::Zero(d);
    require(theta.size() == d, "fmle_generic: start has the wrong dimension");
    theta = model.project(theta);

    EstimateReport report;
    report.rejected_count = ctx.rejected_count();
    report.cutoff = ctx.cutoff();
    if (ctx.skipped_count() > 0)
        report.warnings.push_back(std::to_string(ctx.skipped_count()) + " increments skipped (vanishing diffusion)");

    bool use_simplex = settings.strategy == OptimizerSettings::Strategy::simplex_only;
    if (!use_simplex) {
        report.method = EstimationMethod::newton;
        double value = filtered_loglik(ctx, theta);
        for (int it = 0; it < settings.max_newton_iterations; ++it) {
            report.iterations = it + 1;
            const Eigen::VectorXd grad = projected_gradient(model, theta, filtered_score(ctx, theta));
            if (grad.norm() < settings.gradient_tolerance * (1.0 + std::fabs(value))) {
                report.converged = true;
                break;
            }
            // Newton runs on the coordinates not held by an active bound.
            std::vector<int> free;
            for (int i = 0; i < d; ++i) {
                const auto& b = model.param_bounds[i];
                const bool held = b.lo == b.hi || (theta[i] <= b.lo && grad[i] <= 0.0) ||
                                  (theta[i] >= b.hi && grad[i] >= 0.0);
                if (!held) free.push_back(i);
            }
            const Eigen::MatrixXd full_hess = filtered_hessian(ctx, theta);
            const int f = static_cast<int>(free.size());
            Eigen::MatrixXd hess(f, f);
            Eigen::VectorXd grad_free(f);
            for (int r = 0; r < f; ++r) {
                grad_free[r] = grad[free[r]];
                for (int c = 0; c < f; ++c) hess(r, c) = full_hess(free[r], free[c]);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
            const Eigen::VectorXd lambda = eig.eigenvalues();
            const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
            if (lambda.maxCoeff() > 1e-12 * scale) {
                if (settings.strategy == OptimizerSettings::Strategy::newton_only) {
                    report.warnings.push_back("Hessian is indefinite; Newton iteration stopped");
                    break;
                }
                report.warnings.push_back("Hessian is indefinite; switching to Nelder-Mead");
                use_simplex = true;
                break;
            }
            // Minimal-norm Newton step −H⁺g, ignoring flat directions.
            Eigen::VectorXd step = Eigen::VectorXd::Zero(d);
            bool flat = false;
            for (int k = 0; k < f; ++k) {
                if (lambda[k] < -1e-12 * scale) {
                    const Eigen::VectorXd v = eig.eigenvectors().col(k);
                    const double coef = v.dot(grad_free) / lambda[k];
                    for (int r = 0; r < f; ++r) step[free[r]] -= coef * v[r];
                } else {
                    flat = true;
                }
            }
            const std::string flat_note = "flat direction in the likelihood; using minimal-norm step";
            if (flat && std::find(report.warnings.begin(), report.warnings.end(), flat_note) == report.warnings.end())
                report.warnings.push_back(flat_note);

            double alpha = 1.0;
            ParamVector candidate = model.project(theta + step);
            double cand_value = filtered_loglik(ctx, candidate);
            int halvings = 0;
            while (!(cand_value >= value) && halvings < settings.max_halvings) {
                alpha *= 0.5;
                ++halvings;
                candidate = model.project(theta + alpha * step);
                cand_value = filtered_loglik(ctx, candidate);
            }
            if (!(cand_value >= value)) {
                report.warnings.push_back("line search failed to increase the likelihood");
                break;
            }
            if ((candidate - theta).cwiseAbs().maxCoeff() == 0.0) {
                // no movement possible (e.g. pinned at a bound); re-check the gradient once more
                const Eigen::VectorXd g2 = projected_gradient(model, candidate, filtered_score(ctx, candidate));
                report.converged = g2.norm() < settings.gradient_tolerance * (1.0 + std::fabs(cand_value));
                if (!report.converged) report.warnings.push_back("Newton iteration stalled");
                break;
            }
            theta = candidate;
            value = cand_value;
        }
        if (!use_simplex) {
            report.theta_hat = theta;
            report.objective_at_hat = value;
            if (!report.converged &&
                (report.warnings.empty() || report.iterations >= settings.max_newton_iterations))
                report.warnings.push_back("Newton iteration cap reached without convergence");
        }
    }
    if (use_simplex) {
        const SimplexOutcome out = nelder_mead(ctx, theta, settings);
        report.method = EstimationMethod::nelder_mead;
        report.theta_hat = out.best;
        report.objective_at_hat = out.value;
        report.iterations += out.iterations;
        report.converged = out.converged;
        if (!out.converged) report.warnings.push_back("Nelder-Mead iteration cap reached without convergence");
    }
    if (!report.converged && report.warnings.empty()) report.warnings.push_back("optimizer did not converge");
    return report;
}

EstimateReport fmle_generic(const ParametricModel& model, const Observations& obs, const FilterConfig& cfg,
                            const OptimizerSettings& settings) {
    const LikelihoodContext ctx(model, obs, cfg, settings.endpoint);
    return fmle_generic(ctx, settings);
}

EstimateReport estimate(const ParametricModel& model, const Observations& obs, const FilterConfig& cfg,
                        EstimatorKind kind, Endpoint endpoint) {
    if (kind == EstimatorKind::closed_form) {
        if (model.name == "ou") return fmle_ou(obs, cfg, endpoint);
        if (model.name == "cir") return fmle_cir(obs, cfg, endpoint);
        if (model.name == "hyperbolic") return fmle_hyperbolic(obs, cfg, endpoint);
        fail(ErrorKind::unsupported, "no closed-form estimator for model '" + model.name + "'");
    }
    OptimizerSettings settings;
    settings.endpoint = endpoint;
    return fmle_generic(model, obs, cfg, settings);
}

}  // namespace levydrift

#include "levydrift/likelihood.hpp"

#include <cmath>

#include "levydrift/errors.hpp"
#include "levydrift/numeric.hpp"

namespace levydrift {

namespace {

// σ⁻²(x), or nullopt-like NaN when the point must be skipped.
double inverse_variance(const ParametricModel& model, double x, std::size_t index) {
    const double s = model.sigma_at(x);
    if (s == 0.0 || !std::isfinite(s)) {
        if (model.skip_degenerate_points) return std::nan("");
        fail(ErrorKind::degenerate_diffusion,
             "diffusion coefficient vanishes at observation " + std::to_string(index) + " (x = " +
                 std::to_string(x) + ")",
             index);
    }
    return 1.0 / (s * s);
}

double finite_or_fail(double v, std::size_t index) {
    if (!std::isfinite(v))
        fail(ErrorKind::evaluation, "non-finite drift evaluation at observation " + std::to_string(index), index);
    return v;
}

}  // namespace

LikelihoodContext::LikelihoodContext(ParametricModel model, const Observations& obs, const FilterResult& filter,
                                     Endpoint endpoint)
    : model_(std::move(model)), endpoint_(endpoint) {
    build(obs, filter);
}

LikelihoodContext::LikelihoodContext(ParametricModel model, const Observations& obs, const FilterConfig& cfg,
                                     Endpoint endpoint)
    : model_(std::move(model)), endpoint_(endpoint) {
    build(obs, apply_filter(obs, cfg));
}

void LikelihoodContext::build(const Observations& obs, const FilterResult& filter) {
    require(filter.mask.size() == obs.size(), "likelihood: filter does not match observations");
    increments_ = obs.size();
    rejected_ = filter.rejected_count;
    cutoff_ = filter.cutoff;
    span_ = obs.span();
    terms_.reserve(increments_);
    for (std::size_t i = 1; i <= increments_; ++i) {
        const std::size_t at = endpoint_ == Endpoint::left ? i - 1 : i;
        const double x = obs.values[at];
        const double w = inverse_variance(model_, x, at);
        if (std::isnan(w)) {
            ++skipped_;
            continue;
        }
        terms_.push_back({x, w, filter.kept(i) ? obs.increment(i) : 0.0, obs.step(i)});
    }
}

double filtered_loglik(const LikelihoodContext& ctx, const ParamVector& theta) {
    const auto& model = ctx.model();
    CompensatedSum martingale;
    CompensatedSum compensator;
    std::size_t i = 0;
    for (const auto& t : ctx.terms()) {
        const double b = finite_or_fail(model.drift_at(theta, t.state), i++);
        martingale += t.inv_var * b * t.kept_increment;
        compensator += t.inv_var * b * b * t.step;
    }
    return martingale.value() - 0.5 * compensator.value();
}

Eigen::VectorXd filtered_score(const LikelihoodContext& ctx, const ParamVector& theta) {
    const auto& model = ctx.model();
    const auto d = theta.size();
    std::vector<CompensatedSum> sums(static_cast<std::size_t>(d));
    std::size_t i = 0;
    for (const auto& t : ctx.terms()) {
        const double b = finite_or_fail(model.drift_at(theta, t.state), i++);
        const Eigen::VectorXd g = model.drift_gradient(theta, t.state);
        const double resid = t.kept_increment - b * t.step;
        for (Eigen::Index j = 0; j < d; ++j) sums[j] += t.inv_var * g[j] * resid;
    }
    Eigen::VectorXd score(d);
    for (Eigen::Index j = 0; j < d; ++j) score[j] = sums[j].value();
    return score;
}

Eigen::MatrixXd filtered_hessian(const LikelihoodContext& ctx, const ParamVector& theta) {
    const auto& model = ctx.model();
    const auto d = theta.size();
    std::vector<CompensatedSum> sums(static_cast<std::size_t>(d * d));
    std::size_t i = 0;
    for (const auto& t : ctx.terms()) {
        const double b = finite_or_fail(model.drift_at(theta, t.state), i++);
        const Eigen::VectorXd g = model.drift_gradient(theta, t.state);
        const Eigen::MatrixXd h = model.drift_hessian(theta, t.state);
        const double resid = t.kept_increment - b * t.step;
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index c = r; c < d; ++c)
                sums[r * d + c] += t.inv_var * (h(r, c) * resid - g[r] * g[c] * t.step);
    }
    Eigen::MatrixXd hess(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = r; c < d; ++c) hess(r, c) = hess(c, r) = sums[r * d + c].value();
    return hess;
}

double oracle_continuous_loglik(const SamplePath& path, const ParametricModel& model, const ParamVector& theta) {
    if (!path.has_decomposition())
        fail(ErrorKind::unsupported, "oracle likelihood needs a path with its continuous part");
    CompensatedSum martingale;
    CompensatedSum compensator;
    for (std::size_t k = 0; k + 1 < path.values.size(); ++k) {
        const double x = path.values[k];
        const double w = inverse_variance(model, x, k);
        if (std::isnan(w)) continue;
        const double b = finite_or_fail(model.drift_at(theta, x), k);
        martingale += w * b * (path.cont_part[k + 1] - path.cont_part[k]);
        compensator += w * b * b * (path.times[k + 1] - path.times[k]);
    }
    return martingale.value() - 0.5 * compensator.value();
}

}  // namespace levydrift

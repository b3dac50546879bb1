#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "levydrift/jumpfilter.hpp"
#include "levydrift/model.hpp"
#include "levydrift/simulate.hpp"

namespace levydrift {

// Which observation the state-dependent factors are evaluated at.
// `left` is X_{t_{i−1}} (the likelihood's own convention); `right` is X_{t_i}.
enum class Endpoint { left, right };

// Precomputed per-increment terms of the jump-filtered log-likelihood
//   ℓ(θ) = Σ σ⁻²(x) b(θ,x) Δᵢ X 1{|Δᵢ X| ≤ v} − ½ Σ σ⁻²(x) b(θ,x)² Δᵢ Id.
class LikelihoodContext {
public:
    LikelihoodContext(ParametricModel model, const Observations& obs, const FilterResult& filter,
                      Endpoint endpoint = Endpoint::left);
    LikelihoodContext(ParametricModel model, const Observations& obs, const FilterConfig& cfg,
                      Endpoint endpoint = Endpoint::left);

    struct Term {
        double state;       // x at the chosen endpoint
        double inv_var;     // σ(x)⁻²
        double kept_increment;  // Δᵢ X · mask
        double step;        // Δᵢ Id
    };

    const ParametricModel& model() const noexcept { return model_; }
    const std::vector<Term>& terms() const noexcept { return terms_; }
    std::size_t increments() const noexcept { return increments_; }
    std::size_t skipped_count() const noexcept { return skipped_; }
    std::size_t rejected_count() const noexcept { return rejected_; }
    double cutoff() const noexcept { return cutoff_; }
    double span() const noexcept { return span_; }
    Endpoint endpoint() const noexcept { return endpoint_; }

private:
    void build(const Observations& obs, const FilterResult& filter);

    ParametricModel model_;
    Endpoint endpoint_;
    std::vector<Term> terms_;
    std::size_t increments_ = 0;
    std::size_t skipped_ = 0;
    std::size_t rejected_ = 0;
    double cutoff_ = 0.0;
    double span_ = 0.0;
};

double filtered_loglik(const LikelihoodContext& ctx, const ParamVector& theta);
Eigen::VectorXd filtered_score(const LikelihoodContext& ctx, const ParamVector& theta);
Eigen::MatrixXd filtered_hessian(const LikelihoodContext& ctx, const ParamVector& theta);

// ∫ σ⁻² b dX^c − ½ ∫ σ⁻² b² ds on the fine grid, using the recorded
// continuous part. Simulated data only.
double oracle_continuous_loglik(const SamplePath& path, const ParametricModel& model, const ParamVector& theta);

}  // namespace levydrift

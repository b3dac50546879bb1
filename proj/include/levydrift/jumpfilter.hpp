#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "levydrift/model.hpp"
#include "levydrift/simulate.hpp"

namespace levydrift {

// Threshold rule for the increment filter: v_n = Δ^{1/2−ε}, v_n = Δ^p, or a fixed v.
class FilterConfig {
public:
    enum class Kind { epsilon, power, explicit_cutoff };

    static FilterConfig from_epsilon(double epsilon);
    static FilterConfig from_power(double power);
    static FilterConfig explicit_cutoff(double cutoff);
    // v_n = Δ_n^{1/3}, i.e. ε = 1/6.
    static FilterConfig standard() { return from_power(1.0 / 3.0); }

    Kind kind() const noexcept { return kind_; }
    double value() const noexcept { return value_; }
    // Exponent of Δ_n (1/2 − ε or p); undefined for explicit cutoffs.
    double exponent() const noexcept { return kind_ == Kind::epsilon ? 0.5 - value_ : value_; }
    // ε implied by the rule, for the rate-condition report.
    double implied_epsilon() const noexcept { return 0.5 - exponent(); }

    std::string describe() const;

private:
    FilterConfig(Kind kind, double value) : kind_(kind), value_(value) {}
    Kind kind_;
    double value_;
};

struct FilterResult {
    double cutoff = 0.0;
    std::vector<std::uint8_t> mask;  // mask[i−1] = 1 ⇔ |Δᵢ X| ≤ cutoff
    std::size_t rejected_count = 0;

    bool kept(std::size_t i) const noexcept { return mask[i - 1] != 0; }
};

double cutoff_value(double delta_n, const FilterConfig& cfg, std::vector<std::string>* warnings = nullptr);

FilterResult apply_cutoff(const Observations& obs, double cutoff);
FilterResult apply_filter(const Observations& obs, const FilterConfig& cfg);

using ThetaStateFn = std::function<double(const ParamVector&, double)>;

// Σ f(θ, X_{t_{i−1}}) Δᵢ X 1{|Δᵢ X| ≤ v_n}
double filtered_integral(const ThetaStateFn& f, const ParamVector& theta, const Observations& obs,
                         const FilterResult& filter);
double filtered_integral(const ThetaStateFn& f, const ParamVector& theta, const Observations& obs,
                         const FilterConfig& cfg);

// Σ f(θ, X_{t_{i−1}}) Δᵢ Id
double riemann_sum(const ThetaStateFn& f, const ParamVector& theta, const Observations& obs);

// Σ f(θ, X_{t_{i−1}}) Δᵢ X^c using the path's ground-truth continuous part.
double continuous_part_integral(const ThetaStateFn& f, const ParamVector& theta, const SamplePath& path,
                                const Observations& obs);

struct FilterDiagnostics {
    double cutoff = 0.0;
    std::size_t intervals = 0;
    std::size_t rejected_count = 0;
    std::size_t jump_intervals = 0;       // contain a recorded jump with |size| > cutoff
    std::size_t detected_jumps = 0;       // ... and were rejected
    std::size_t jump_free_intervals = 0;  // contain no recorded jump
    std::size_t false_rejections = 0;     // ... and were rejected
    double true_positive_rate = 0.0;
    double false_rejection_rate = 0.0;
};

// Scores the filter against the jumps recorded in `path`. `obs` must sit on
// the path's fine grid.
FilterDiagnostics filter_diagnostics(const SamplePath& path, const Observations& obs, const FilterConfig& cfg);

// CSV `t,x,keep`; keep is blank for the first row (no increment).
void write_mask_csv(std::ostream& os, const Observations& obs, const FilterResult& filter);

}  // namespace levydrift

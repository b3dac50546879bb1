#include "levydrift/jumpfilter.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "levydrift/errors.hpp"
#include "levydrift/numeric.hpp"

namespace levydrift {

FilterConfig FilterConfig::from_epsilon(double epsilon) {
    require(epsilon > 0.0 && epsilon < 0.5, "filter epsilon must lie in (0, 1/2)");
    return FilterConfig(Kind::epsilon, epsilon);
}

FilterConfig FilterConfig::from_power(double power) {
    require(power > 0.0 && power <= 0.5, "filter power must lie in (0, 1/2]");
    return FilterConfig(Kind::power, power);
}

FilterConfig FilterConfig::explicit_cutoff(double cutoff) {
    require(cutoff >= 0.0 && !std::isnan(cutoff), "explicit cutoff must be >= 0");
    return FilterConfig(Kind::explicit_cutoff, cutoff);
}

std::string FilterConfig::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::epsilon: os << "v_n = Delta^(1/2 - " << value_ << ")"; break;
        case Kind::power: os << "v_n = Delta^" << value_; break;
        case Kind::explicit_cutoff: os << "v_n = " << value_; break;
    }
    return os.str();
}

double cutoff_value(double delta_n, const FilterConfig& cfg, std::vector<std::string>* warnings) {
    if (cfg.kind() == FilterConfig::Kind::explicit_cutoff) return cfg.value();
    require(delta_n > 0.0, "cutoff_value: delta_n must be > 0");
    if (delta_n >= 1.0 && warnings)
        warnings->push_back("sampling step >= 1: Delta^p is not a small threshold");
    return std::pow(delta_n, cfg.exponent());
}

FilterResult apply_cutoff(const Observations& obs, double cutoff) {
    const std::size_t n = obs.size();
    require(n >= 1, "apply_filter: need at least one increment");
    FilterResult out;
    out.cutoff = cutoff;
    out.mask.resize(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const bool keep = std::fabs(obs.increment(i)) <= cutoff;
        out.mask[i - 1] = keep ? 1 : 0;
        if (!keep) ++out.rejected_count;
    }
    return out;
}

FilterResult apply_filter(const Observations& obs, const FilterConfig& cfg) {
    return apply_cutoff(obs, cutoff_value(obs.delta_max, cfg));
}

namespace {

double checked(double value, std::size_t i, const char* what) {
    if (!std::isfinite(value))
        fail(ErrorKind::evaluation, std::string(what) + ": non-finite integrand at observation " + std::to_string(i - 1),
             i - 1);
    return value;
}

}  // namespace

double filtered_integral(const ThetaStateFn& f, const ParamVector& theta, const Observations& obs,
                         const FilterResult& filter) {
    require(filter.mask.size() == obs.size(), "filtered_integral: filter does not match observations");
    CompensatedSum sum;
    for (std::size_t i = 1; i <= obs.size(); ++i) {
        if (!filter.kept(i)) continue;
        sum += checked(f(theta, obs.values[i - 1]), i, "filtered_integral") * obs.increment(i);
    }
    return sum.value();
}

double filtered_integral(const ThetaStateFn& f, const ParamVector& theta, const Observations& obs,
                         const FilterConfig& cfg) {
    return filtered_integral(f, theta, obs, apply_filter(obs, cfg));
}

double riemann_sum(const ThetaStateFn& f, const ParamVector& theta, const Observations& obs) {
    CompensatedSum sum;
    for (std::size_t i = 1; i <= obs.size(); ++i)
        sum += checked(f(theta, obs.values[i - 1]), i, "riemann_sum") * obs.step(i);
    return sum.value();
}

namespace {

// Index of each observation time on the path's fine grid.
std::vector<std::size_t> align_to_grid(const SamplePath& path, const Observations& obs) {
    std::vector<std::size_t> idx(obs.times.size());
    for (std::size_t i = 0; i < obs.times.size(); ++i) {
        const double t = obs.times[i];
        auto it = std::lower_bound(path.times.begin(), path.times.end(), t);
        std::size_t k = static_cast<std::size_t>(it - path.times.begin());
        if (k > 0 && (k == path.times.size() || std::fabs(path.times[k - 1] - t) < std::fabs(path.times[k] - t)))
            --k;
        if (k >= path.times.size() || std::fabs(path.times[k] - t) > 1e-9 * (1.0 + std::fabs(t)) ||
            std::fabs(path.values[k] - obs.values[i]) > 1e-12 * (1.0 + std::fabs(obs.values[i])))
            fail(ErrorKind::invalid_argument,
                 "observation " + std::to_string(i) + " is not a point of the path's fine grid", i);
        idx[i] = k;
    }
    return idx;
}

}  // namespace

double continuous_part_integral(const ThetaStateFn& f, const ParamVector& theta, const SamplePath& path,
                                const Observations& obs) {
    if (!path.has_decomposition())
        fail(ErrorKind::unsupported, "path carries no continuous/jump decomposition");
    const auto idx = align_to_grid(path, obs);
    CompensatedSum sum;
    for (std::size_t i = 1; i < idx.size(); ++i) {
        const double dxc = path.cont_part[idx[i]] - path.cont_part[idx[i - 1]];
        sum += checked(f(theta, obs.values[i - 1]), i, "continuous_part_integral") * dxc;
    }
    return sum.value();
}

FilterDiagnostics filter_diagnostics(const SamplePath& path, const Observations& obs, const FilterConfig& cfg) {
    const auto idx = align_to_grid(path, obs);
    const FilterResult filter = apply_filter(obs, cfg);

    FilterDiagnostics d;
    d.cutoff = filter.cutoff;
    d.intervals = obs.size();
    d.rejected_count = filter.rejected_count;

    std::size_t e = 0;
    const auto& events = path.jump_events;
    for (std::size_t i = 1; i <= obs.size(); ++i) {
        const double lo = path.times[idx[i - 1]];
        const double hi = path.times[idx[i]];
        while (e < events.size() && events[e].time <= lo) ++e;
        bool any = false;
        bool big = false;
        for (std::size_t j = e; j < events.size() && events[j].time <= hi; ++j) {
            any = true;
            big = big || std::fabs(events[j].size) > filter.cutoff;
        }
        const bool rejected = !filter.kept(i);
        if (big) {
            ++d.jump_intervals;
            if (rejected) ++d.detected_jumps;
        }
        if (!any) {
            ++d.jump_free_intervals;
            if (rejected) ++d.false_rejections;
        }
    }
    d.true_positive_rate =
        d.jump_intervals ? static_cast<double>(d.detected_jumps) / static_cast<double>(d.jump_intervals) : 1.0;
    d.false_rejection_rate = d.jump_free_intervals ? static_cast<double>(d.false_rejections) /
                                                         static_cast<double>(d.jump_free_intervals)
                                                   : 0.0;
    return d;
}

void write_mask_csv(std::ostream& os, const Observations& obs, const FilterResult& filter) {
    require(filter.mask.size() == obs.size(), "write_mask_csv: filter does not match observations");
    const auto old_precision = os.precision(17);
    os << "t,x,keep\n";
    os << obs.times[0] << ',' << obs.values[0] << ",\n";
    for (std::size_t i = 1; i <= obs.size(); ++i)
        os << obs.times[i] << ',' << obs.values[i] << ',' << (filter.kept(i) ? 1 : 0) << '\n';
    os.precision(old_precision);
}

}  // namespace levydrift

#include "levydrift/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "levydrift/errors.hpp"

namespace levydrift {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double random_sign(Rng& rng) { return (rng() >> 63) ? 1.0 : -1.0; }

// Standard symmetric CMS variable, characteristic function exp(−|t|^α).
double standard_symmetric_stable(double alpha, Rng& rng) {
    const double v = std::numbers::pi * (uniform_open(rng) - 0.5);
    if (alpha == 1.0) return std::tan(v);
    const double w = -std::log(uniform_open(rng));
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

// Per-path samplers that hold distributions parameterized by the fixed step h.
class CompoundPoissonStepper {
public:
    CompoundPoissonStepper(const CompoundPoisson& spec, double h)
        : spec_(spec), h_(h), count_(spec.intensity > 0.0 ? spec.intensity * h : 1.0) {}

    void draw(std::vector<JumpDraw>& out, Rng& rng) {
        out.clear();
        if (spec_.intensity <= 0.0) return;
        const int count = count_(rng);
        // offsets uniform on (0, h]
        for (int j = 0; j < count; ++j) out.push_back({h_ * (1.0 - uniform_open(rng)), 0.0});
        for (auto& d : out) d.size = sample_jump_size(spec_, rng);
        std::sort(out.begin(), out.end(), [](const JumpDraw& a, const JumpDraw& b) { return a.offset < b.offset; });
    }

private:
    CompoundPoisson spec_;
    double h_;
    std::poisson_distribution<int> count_;
};

class TemperedStableStepper {
public:
    TemperedStableStepper(const TemperedStable& spec, double h)
        : spec_(spec), floor_(tempered_stable_floor(spec)),
          proposals_(spec.normalizer > 0.0 ? 2.0 * spec.normalizer * std::pow(floor_, -spec.alpha) / spec.alpha * h
                                           : 1.0) {}

    double draw(Rng& rng) {
        if (spec_.normalizer <= 0.0) return 0.0;
        const int count = proposals_(rng);
        double sum = 0.0;
        for (int j = 0; j < count; ++j) {
            // Pareto proposal from the untempered measure on |z| > floor, thinned by e^{−λz}.
            const double z = floor_ * std::pow(uniform_open(rng), -1.0 / spec_.alpha);
            if (uniform_open(rng) < std::exp(-spec_.tempering * z)) sum += random_sign(rng) * z;
        }
        return sum;
    }

private:
    TemperedStable spec_;
    double floor_;
    std::poisson_distribution<int> proposals_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

double sample_jump_size(const CompoundPoisson& spec, Rng& rng) {
    double size = std::visit(overloaded{
                                 [&](const ExponentialJumps& e) { return -std::log(uniform_open(rng)) / e.rate; },
                                 [&](const GaussianJumps& g) {
                                     std::normal_distribution<double> normal(g.mean, g.std);
                                     return normal(rng);
                                 },
                                 [&](const ConstantJumps& c) { return c.value; },
                             },
                             spec.jump_law);
    if (spec.sign == JumpSign::two_sided) size *= random_sign(rng);
    return size;
}

std::vector<JumpDraw> sample_compound_poisson_segment(const CompoundPoisson& spec, double h, Rng& rng) {
    require(h > 0.0, "sample_compound_poisson_segment: h must be > 0");
    std::vector<JumpDraw> out;
    if (spec.intensity <= 0.0) return out;
    std::poisson_distribution<int> count(spec.intensity * h);
    const int k = count(rng);
    out.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) out.push_back({h * (1.0 - uniform_open(rng)), 0.0});
    for (auto& d : out) d.size = sample_jump_size(spec, rng);
    std::sort(out.begin(), out.end(), [](const JumpDraw& a, const JumpDraw& b) { return a.offset < b.offset; });
    return out;
}

double cms_levy_constant(double alpha) {
    require(alpha > 0.0 && alpha < 2.0, "stable alpha must lie in (0, 2)");
    return std::tgamma(1.0 + alpha) * std::sin(std::numbers::pi * alpha / 2.0) / std::numbers::pi;
}

double sample_stable_increment(double alpha, double scale, double h, Rng& rng) {
    require(alpha > 0.0 && alpha < 2.0, "sample_stable_increment: alpha must lie in (0, 2)");
    require(scale > 0.0 && h > 0.0, "sample_stable_increment: scale and h must be > 0");
    const double c = scale * std::pow(cms_levy_constant(alpha), -1.0 / alpha);
    return c * std::pow(h, 1.0 / alpha) * standard_symmetric_stable(alpha, rng);
}

double tempered_stable_floor(const TemperedStable& spec) {
    // 2C ∫_0^r z^{1−α} dz = 2C r^{2−α}/(2−α) ≤ 1e-6
    const double a = spec.alpha;
    if (spec.normalizer <= 0.0) return 1.0;
    return std::pow(1e-6 * (2.0 - a) / (2.0 * spec.normalizer), 1.0 / (2.0 - a));
}

double sample_tempered_stable_increment(const TemperedStable& spec, double h, Rng& rng) {
    validate(LevySpec{spec});
    require(h > 0.0, "sample_tempered_stable_increment: h must be > 0");
    TemperedStableStepper stepper(spec, h);
    return stepper.draw(rng);
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

DrivingNoise draw_driving_noise(const LevySpec& levy, double t_end, std::size_t fine_steps, Rng& rng) {
    require(fine_steps >= 1, "fine_steps must be >= 1");
    require(t_end > 0.0, "t_end must be > 0");
    validate(levy);
    const double h = t_end / static_cast<double>(fine_steps);
    const double root_h = std::sqrt(h);

    DrivingNoise noise;
    noise.brownian.resize(fine_steps);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::visit(overloaded{
                   [&](const NoJumps&) {
                       for (auto& dw : noise.brownian) dw = root_h * normal(rng);
                   },
                   [&](const CompoundPoisson& cp) {
                       CompoundPoissonStepper stepper(cp, h);
                       std::vector<JumpDraw> draws;
                       for (std::size_t k = 0; k < fine_steps; ++k) {
                           noise.brownian[k] = root_h * normal(rng);
                           stepper.draw(draws, rng);
                           for (const auto& d : draws) noise.jumps.push_back({k, d.offset, d.size, false});
                       }
                   },
                   [&](const AlphaStable& s) {
                       for (std::size_t k = 0; k < fine_steps; ++k) {
                           noise.brownian[k] = root_h * normal(rng);
                           noise.jumps.push_back({k, h, sample_stable_increment(s.alpha, s.scale, h, rng), true});
                       }
                   },
                   [&](const TemperedStable& ts) {
                       TemperedStableStepper stepper(ts, h);
                       for (std::size_t k = 0; k < fine_steps; ++k) {
                           noise.brownian[k] = root_h * normal(rng);
                           const double lump = stepper.draw(rng);
                           if (lump != 0.0) noise.jumps.push_back({k, h, lump, true});
                       }
                   },
               },
               levy);
    return noise;
}

SamplePath integrate_path(const ParametricModel& model, const ParamVector& theta, double x0, double t_end,
                          const DrivingNoise& noise, const SimulationOptions& options) {
    const std::size_t steps = noise.brownian.size();
    require(steps >= 1, "integrate_path: need at least one step");
    require(t_end > 0.0, "integrate_path: t_end must be > 0");
    require(std::isfinite(x0), "integrate_path: x0 must be finite");
    const double h = t_end / static_cast<double>(steps);

    SamplePath path;
    path.times.resize(steps + 1);
    path.values.resize(steps + 1);
    if (options.keep_decomposition) {
        path.cont_part.resize(steps + 1);
        path.jump_part.resize(steps + 1);
        path.cont_part[0] = x0;
        path.jump_part[0] = 0.0;
    }
    for (std::size_t k = 0; k <= steps; ++k)
        path.times[k] = t_end * static_cast<double>(k) / static_cast<double>(steps);
    path.times[steps] = t_end;
    path.values[0] = x0;

    double x = x0;
    double cont = x0;
    double jump = 0.0;
    std::size_t next_jump = 0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double dc = model.drift_at(theta, x) * h + model.sigma_at(x) * noise.brownian[k];
        double dj = 0.0;
        while (next_jump < noise.jumps.size() && noise.jumps[next_jump].step == k) {
            const auto& j = noise.jumps[next_jump++];
            const double size = model.gamma_at(x + dj) * j.size;
            dj += size;
            if (std::fabs(size) > options.jump_record_floor)
                path.jump_events.push_back({path.times[k] + j.offset, size});
        }
        x += dc + dj;
        if (!std::isfinite(x) || std::fabs(x) > options.divergence_bound)
            fail(ErrorKind::divergence, "path diverged at step " + std::to_string(k + 1), k + 1);
        path.values[k + 1] = x;
        if (options.keep_decomposition) {
            cont += dc;
            jump += dj;
            path.cont_part[k + 1] = cont;
            path.jump_part[k + 1] = jump;
        }
    }
    for (auto& e : path.jump_events) e.time = std::min(e.time, t_end);
    return path;
}

SamplePath simulate_path(const ParametricModel& model, const ParamVector& theta, double x0, double t_end,
                         std::size_t fine_steps, std::uint64_t seed, const SimulationOptions& options) {
    model.validate_theta(theta);
    Rng rng = make_rng(seed);
    const DrivingNoise noise = draw_driving_noise(model.levy, t_end, fine_steps, rng);
    SamplePath path = integrate_path(model, theta, x0, t_end, noise, options);
    path.seed = seed;
    return path;
}

// ---------------------------------------------------------------------------
// Observations
// ---------------------------------------------------------------------------

Observations Observations::from_series(std::vector<double> times, std::vector<double> values) {
    require(times.size() == values.size(), "observations: times and values differ in length");
    require(times.size() >= 2, "observations: need at least two points (n >= 1)");
    Observations obs;
    double delta_max = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
            fail(ErrorKind::invalid_argument, "observations: non-finite entry at index " + std::to_string(i), i);
        if (i > 0) {
            const double step = times[i] - times[i - 1];
            if (step < 0.0)
                fail(ErrorKind::invalid_argument, "observations: times decrease at index " + std::to_string(i), i);
            delta_max = std::max(delta_max, step);
        }
    }
    require(delta_max > 0.0, "observations: maximal sampling step must be > 0");
    obs.times = std::move(times);
    obs.values = std::move(values);
    obs.delta_max = delta_max;
    return obs;
}

namespace {

std::vector<std::size_t> observation_grid(const SamplePath& path, std::size_t n, std::vector<std::string>* warnings) {
    const std::size_t steps = path.steps();
    require(n >= 1, "subsample: n must be >= 1");
    if (n > steps)
        fail(ErrorKind::invalid_argument,
             "subsample: n = " + std::to_string(n) + " exceeds fine steps = " + std::to_string(steps));
    const bool exact = steps % n == 0;
    if (!exact && warnings)
        warnings->push_back("subsample: n = " + std::to_string(n) + " does not divide fine steps = " +
                            std::to_string(steps) + "; using nearest grid points");
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        idx[i] = exact ? i * (steps / n)
                       : static_cast<std::size_t>(std::llround(static_cast<double>(i) * static_cast<double>(steps) /
                                                               static_cast<double>(n)));
    return idx;
}

}  // namespace

Observations subsample(const SamplePath& path, std::size_t n, std::vector<std::string>* warnings) {
    const auto idx = observation_grid(path, n, warnings);
    std::vector<double> times(idx.size());
    std::vector<double> values(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        times[i] = path.times[idx[i]];
        values[i] = path.values[idx[i]];
    }
    return Observations::from_series(std::move(times), std::move(values));
}

SamplePath thin_path(const SamplePath& path, std::size_t n, std::vector<std::string>* warnings) {
    const auto idx = observation_grid(path, n, warnings);
    SamplePath out;
    out.seed = path.seed;
    out.jump_events = path.jump_events;
    const bool decomposed = path.has_decomposition();
    for (const std::size_t k : idx) {
        out.times.push_back(path.times[k]);
        out.values.push_back(path.values[k]);
        if (decomposed) {
            out.cont_part.push_back(path.cont_part[k]);
            out.jump_part.push_back(path.jump_part[k]);
        }
    }
    return out;
}

Observations to_observations(const SamplePath& path) { return Observations::from_series(path.times, path.values); }

}  // namespace levydrift

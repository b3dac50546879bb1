#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "levydrift/model.hpp"
#include "levydrift/rng.hpp"

namespace levydrift {

struct JumpEvent {
    double time = 0.0;
    double size = 0.0;
};

// Fine-grid trajectory with its ground-truth decomposition
// values[k] = values[0] + (cont_part[k] − cont_part[0]) + (jump_part[k] − jump_part[0]).
struct SamplePath {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> cont_part;
    std::vector<double> jump_part;
    std::vector<JumpEvent> jump_events;
    std::uint64_t seed = 0;

    std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
    bool has_decomposition() const noexcept {
        return !cont_part.empty() && cont_part.size() == values.size() && jump_part.size() == values.size();
    }
};

// Discrete sample X_{t_0}, …, X_{t_n}.
struct Observations {
    std::vector<double> times;
    std::vector<double> values;
    double delta_max = 0.0;

    // Number of increments n.
    std::size_t size() const noexcept { return values.empty() ? 0 : values.size() - 1; }
    double span() const noexcept { return times.back() - times.front(); }
    double increment(std::size_t i) const noexcept { return values[i] - values[i - 1]; }
    double step(std::size_t i) const noexcept { return times[i] - times[i - 1]; }

    // Validates ordering and n ≥ 1, computes delta_max.
    static Observations from_series(std::vector<double> times, std::vector<double> values);
};

struct SimulationOptions {
    double jump_record_floor = 1e-8;
    double divergence_bound = 1e12;
    bool keep_decomposition = true;
};

// One jump of the driver inside a fine step, `offset` ∈ (0, h].
struct JumpDraw {
    double offset = 0.0;
    double size = 0.0;
};

// Pre-drawn randomness for one path: Brownian increments per fine step and
// driver jumps tagged with their step. Jumps must be ordered by (step, offset).
struct DrivingNoise {
    struct StepJump {
        std::size_t step = 0;
        double offset = 0.0;
        double size = 0.0;
        bool lumped = false;  // per-step aggregate of an infinite-activity driver
    };
    std::vector<double> brownian;  // ΔW per step, variance h
    std::vector<StepJump> jumps;
};

DrivingNoise draw_driving_noise(const LevySpec& levy, double t_end, std::size_t fine_steps, Rng& rng);

// Deterministic Euler integrator over pre-drawn noise:
// X ← X + b(θ,X)h + σ(X)ΔW + Σ γ(X₋)ΔL.
SamplePath integrate_path(const ParametricModel& model, const ParamVector& theta, double x0, double t_end,
                          const DrivingNoise& noise, const SimulationOptions& options = {});

SamplePath simulate_path(const ParametricModel& model, const ParamVector& theta, double x0, double t_end,
                         std::size_t fine_steps, std::uint64_t seed, const SimulationOptions& options = {});

std::vector<JumpDraw> sample_compound_poisson_segment(const CompoundPoisson& spec, double h, Rng& rng);
double sample_jump_size(const CompoundPoisson& spec, Rng& rng);

// Lévy-density constant of the standard Chambers–Mallows–Stuck variable
// (characteristic function exp(−|t|^α)): density C_α/|z|^{1+α}.
double cms_levy_constant(double alpha);
// Symmetric α-stable increment over time h for Lévy density scale^α/|z|^{1+α}.
double sample_stable_increment(double alpha, double scale, double h, Rng& rng);

// Jumps with |z| below this floor are replaced by their (zero) mean; chosen so
// the neglected variance per unit time is at most 1e-6.
double tempered_stable_floor(const TemperedStable& spec);
double sample_tempered_stable_increment(const TemperedStable& spec, double h, Rng& rng);

// Equidistant observations t_i = i·t_end/n picked from the fine grid. When n
// does not divide the step count, the nearest grid point is used and a
// warning is appended.
Observations subsample(const SamplePath& path, std::size_t n, std::vector<std::string>* warnings = nullptr);
Observations to_observations(const SamplePath& path);
// Same grid selection as `subsample`, keeping the decomposition and the jump
// events of the full path.
SamplePath thin_path(const SamplePath& path, std::size_t n, std::vector<std::string>* warnings = nullptr);

// CSV export/import. Header `t,x[,xc,xj]`; decomposition columns are the
// accumulated continuous and jump parts.
void write_path_csv(std::ostream& os, const SamplePath& path, bool decompose);
void write_observations_csv(std::ostream& os, const Observations& obs);
// Accepts a `t,x` header (extra columns ignored). Errors name the line.
Observations read_observations_csv(std::istream& is);
Observations read_observations_csv_file(const std::string& filename);

}  // namespace levydrift

#include "levydrift/inference.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <variant>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levydrift/errors.hpp"

namespace levydrift {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double inf = std::numeric_limits<double>::infinity();

}  // namespace

FisherEstimate fisher_ergodic(const ParametricModel& model, const ParamVector& theta, const Observations& obs) {
    require(obs.span() > 0.0, "fisher_ergodic: observation span must be > 0");
    model.validate_theta(theta);
    const int d = model.param_dim;

    FisherEstimate out;
    out.sample_span = obs.span();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 1; i <= obs.size(); ++i) {
        const double x = obs.values[i - 1];
        const double s = model.sigma_at(x);
        if (s == 0.0 || !std::isfinite(s)) {
            if (!model.skip_degenerate_points)
                fail(ErrorKind::degenerate_diffusion,
                     "diffusion coefficient vanishes at observation " + std::to_string(i - 1), i - 1);
            ++out.skipped;
            continue;
        }
        const Eigen::VectorXd g = model.drift_gradient(theta, x);
        acc.noalias() += (obs.step(i) / (s * s)) * g * g.transpose();
    }
    if (out.skipped > 0)
        out.warnings.push_back(std::to_string(out.skipped) + " points skipped (vanishing diffusion)");
    out.matrix = 0.5 * (acc + acc.transpose()) / out.sample_span;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix);
    const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
    const double lo = eig.eigenvalues().minCoeff();
    out.condition_number = lo > 0.0 ? hi / lo : inf;
    if (out.condition_number < max_fisher_condition) {
        out.inverse = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                      eig.eigenvectors().transpose();
    } else {
        std::ostringstream os;
        os << "Fisher estimate is ill-conditioned (condition number " << out.condition_number
           << "); inverse not available";
        out.warnings.push_back(os.str());
    }
    return out;
}

double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
}

std::vector<Interval> confidence_intervals(const ParamVector& theta_hat, const FisherEstimate& fisher, double t_n,
                                           double level) {
    require(level >= 0.0 && level < 1.0, "confidence level must lie in [0, 1)");
    require(t_n > 0.0, "confidence_intervals: t_n must be > 0");
    if (!fisher.inverse) fail(ErrorKind::unavailable, "Fisher information is not invertible; no confidence intervals");
    require(fisher.inverse->rows() == theta_hat.size(), "confidence_intervals: dimension mismatch");
    const double z = level == 0.0 ? 0.0 : normal_quantile(0.5 * (1.0 + level));
    std::vector<Interval> out;
    out.reserve(static_cast<std::size_t>(theta_hat.size()));
    for (Eigen::Index j = 0; j < theta_hat.size(); ++j) {
        const double half = z * std::sqrt(std::max(0.0, (*fisher.inverse)(j, j)) / t_n);
        out.push_back({theta_hat[j] - half, theta_hat[j] + half});
    }
    return out;
}

std::string to_string(RateVerdict verdict) {
    switch (verdict) {
        case RateVerdict::small: return "small";
        case RateVerdict::moderate: return "moderate";
        case RateVerdict::large: return "large";
    }
    return "unknown";
}

RateVerdict classify_rate(double value) {
    if (value < 0.1) return RateVerdict::small;
    if (value > 1.0) return RateVerdict::large;
    return RateVerdict::moderate;
}

// ---------------------------------------------------------------------------
// ν-integrals
// ---------------------------------------------------------------------------

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

// P(|Z| ≤ a) and E[|Z|; |Z| < a] for one jump size.
struct SizeLaw {
    double prob_below;
    double abs_moment_below;
};

SizeLaw size_law(const JumpLaw& law, double a) {
    return std::visit(
        overloaded{
            [a](const ExponentialJumps& e) {
                const double ea = std::exp(-e.rate * a);
                return SizeLaw{1.0 - ea, (1.0 - ea * (1.0 + e.rate * a)) / e.rate};
            },
            [a](const GaussianJumps& g) {
                if (g.std == 0.0) {
                    const bool in = std::fabs(g.mean) < a;
                    return SizeLaw{std::fabs(g.mean) <= a ? 1.0 : 0.0, in ? std::fabs(g.mean) : 0.0};
                }
                // ∫_c^d y φ_{m,s}(y) dy = m(Φ(β) − Φ(α)) + s(φ(α) − φ(β))
                const auto partial = [&](double c, double d) {
                    const double al = (c - g.mean) / g.std;
                    const double be = (d - g.mean) / g.std;
                    return g.mean * (std_normal_cdf(be) - std_normal_cdf(al)) +
                           g.std * (std_normal_pdf(al) - std_normal_pdf(be));
                };
                const double p = std_normal_cdf((a - g.mean) / g.std) - std_normal_cdf((-a - g.mean) / g.std);
                return SizeLaw{p, partial(0.0, a) - partial(-a, 0.0)};
            },
            [a](const ConstantJumps& c) {
                const double v = std::fabs(c.value);
                return SizeLaw{v <= a ? 1.0 : 0.0, v < a ? v : 0.0};
            },
        },
        law);
}

// 2C ∫_0^a z^{−α} e^{−λz} dz
double tempered_abs_moment(const TemperedStable& t, double a) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    const auto f = [&](double z) { return std::pow(z, -t.alpha) * std::exp(-t.tempering * z); };
    return 2.0 * t.normalizer * integrator.integrate(f, 0.0, a);
}

// 2C ∫_a^∞ z^{−1−α} e^{−λz} dz
double tempered_mass_above(const TemperedStable& t, double a) {
    boost::math::quadrature::exp_sinh<double> integrator;
    const auto f = [&](double u) {
        const double z = a + u;
        return std::pow(z, -1.0 - t.alpha) * std::exp(-t.tempering * z);
    };
    return 2.0 * t.normalizer * integrator.integrate(f);
}

}  // namespace

double levy_mass_below(const LevySpec& levy, double a) {
    return std::visit(overloaded{
                          [](const NoJumps&) { return 0.0; },
                          [a](const CompoundPoisson& cp) {
                              const auto law = size_law(cp.jump_law, a);
                              return cp.intensity * law.prob_below;
                          },
                          [](const AlphaStable&) { return inf; },
                          [](const TemperedStable& t) { return t.normalizer > 0.0 ? inf : 0.0; },
                      },
                      levy);
}

double levy_abs_moment_below(const LevySpec& levy, double a) {
    return std::visit(overloaded{
                          [](const NoJumps&) { return 0.0; },
                          [a](const CompoundPoisson& cp) {
                              return cp.intensity * size_law(cp.jump_law, a).abs_moment_below;
                          },
                          [a](const AlphaStable& s) {
                              // 2 scale^α a^{1−α} / (1−α); diverges for α ≥ 1
                              if (s.alpha >= 1.0) return inf;
                              return 2.0 * std::pow(s.scale, s.alpha) * std::pow(a, 1.0 - s.alpha) / (1.0 - s.alpha);
                          },
                          [a](const TemperedStable& t) { return tempered_abs_moment(t, a); },
                      },
                      levy);
}

double levy_mass_above(const LevySpec& levy, double a) {
    return std::visit(overloaded{
                          [](const NoJumps&) { return 0.0; },
                          [a](const CompoundPoisson& cp) {
                              return cp.intensity * (1.0 - size_law(cp.jump_law, a).prob_below);
                          },
                          [a](const AlphaStable& s) {
                              return 2.0 * std::pow(s.scale, s.alpha) * std::pow(a, -s.alpha) / s.alpha;
                          },
                          [a](const TemperedStable& t) { return tempered_mass_above(t, a); },
                      },
                      levy);
}

RateConditionReport rate_condition_check(std::size_t n, double delta_n, double epsilon, const LevySpec& levy) {
    require(n >= 1, "rate_condition_check: n must be >= 1");
    require(delta_n > 0.0, "rate_condition_check: delta_n must be > 0");
    require(epsilon > 0.0 && epsilon < 0.5, "rate_condition_check: epsilon must lie in (0, 1/2)");
    validate(levy);

    const double nd = static_cast<double>(n);
    const double e = epsilon;
    RateConditionReport r;
    r.cutoff = std::pow(delta_n, 0.5 - e);
    const double v = r.cutoff;
    const auto add = [&](std::string expr, double value) {
        r.terms.push_back({std::move(expr), value, classify_rate(value)});
        return r.terms.size() - 1;
    };

    if (has_finite_activity(levy)) {
        add("n*Delta^(3-eps)", nd * std::pow(delta_n, 3.0 - e));
        add("sqrt(n)*Delta^(1-eps/2)*nu(|z|<=2v)^(1-eps/2)",
            std::sqrt(nd) * std::pow(delta_n, 1.0 - e / 2.0) * std::pow(levy_mass_below(levy, 2.0 * v), 1.0 - e / 2.0));
        add("sqrt(n)*Delta^(1/2)*int_{|z|<2v}|z|nu(dz)",
            std::sqrt(nd) * std::sqrt(delta_n) * levy_abs_moment_below(levy, 2.0 * v));
        const auto* cp = std::get_if<CompoundPoisson>(&levy);
        const bool bounded_density = cp && !std::holds_alternative<ConstantJumps>(cp->jump_law) &&
                                     !(std::holds_alternative<GaussianJumps>(cp->jump_law) &&
                                       std::get<GaussianJumps>(cp->jump_law).std == 0.0);
        if (bounded_density) {
            r.binding = add("n*Delta^(3-4eps)", nd * std::pow(delta_n, 3.0 - 4.0 * e));
            r.notes.push_back("bounded jump density: the conditions reduce to n*Delta^(3-4eps) -> 0");
        } else if (std::holds_alternative<NoJumps>(levy)) {
            r.binding = 0;
            r.notes.push_back("no jumps: only the discretization condition applies");
        }
        return r;
    }

    const double alpha = std::holds_alternative<AlphaStable>(levy) ? std::get<AlphaStable>(levy).alpha
                                                                    : std::get<TemperedStable>(levy).alpha;
    const double a = 3.0 * v;  // 3 v_n / γ_min with γ ≡ 1
    add("sqrt(n*Delta)*(int_{|z|<=3v}|z|nu(dz))^(1-eps/2)",
        std::sqrt(nd * delta_n) * std::pow(levy_abs_moment_below(levy, a), 1.0 - e / 2.0));
    add("sqrt(n)*Delta^(3/2-2eps)*nu(|z|>=3v)^(1-eps/2)",
        std::sqrt(nd) * std::pow(delta_n, 1.5 - 2.0 * e) * std::pow(levy_mass_above(levy, a), 1.0 - e / 2.0));
    add("n*Delta^(3-eps)*nu(|z|>=3v)^(2-eps)",
        nd * std::pow(delta_n, 3.0 - e) * std::pow(levy_mass_above(levy, a), 2.0 - e));
    r.binding = add("n*Delta^(2-alpha-eps)", nd * std::pow(delta_n, 2.0 - alpha - e));
    if (alpha >= 1.0)
        r.notes.push_back("alpha >= 1: infinite variation jumps lie outside the theory (int |z| nu(dz) diverges)");
    return r;
}

}  // namespace levydrift

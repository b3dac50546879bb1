#include "levydrift/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "levydrift/errors.hpp"
#include "levydrift/rng.hpp"

namespace levydrift {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

double parse_number(std::string_view token, std::string_view context) {
    double value = 0.0;
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || token.empty())
        fail(ErrorKind::invalid_argument,
             "bad number '" + std::string(token) + "' in levy spec '" + std::string(context) + "'");
    return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lévy specs
// ---------------------------------------------------------------------------

void validate(const LevySpec& levy) {
    std::visit(overloaded{
                   [](const NoJumps&) {},
                   [](const CompoundPoisson& cp) {
                       require(cp.intensity >= 0.0 && std::isfinite(cp.intensity),
                               "compound Poisson intensity must be >= 0");
                       std::visit(overloaded{
                                      [](const ExponentialJumps& e) {
                                          require(e.rate > 0.0, "exponential jump rate must be > 0");
                                      },
                                      [](const GaussianJumps& g) {
                                          require(g.std >= 0.0, "gaussian jump std must be >= 0");
                                      },
                                      [](const ConstantJumps&) {},
                                  },
                                  cp.jump_law);
                   },
                   [](const AlphaStable& s) {
                       require(s.alpha > 0.0 && s.alpha < 2.0, "stable alpha must lie in (0, 2)");
                       require(s.scale > 0.0, "stable scale must be > 0");
                   },
                   [](const TemperedStable& t) {
                       if (!(t.alpha > 0.0 && t.alpha < 1.0))
                           fail(ErrorKind::unsupported, "tempered stable requires 0 < alpha < 1");
                       require(t.tempering > 0.0, "tempered stable tempering must be > 0");
                       require(t.normalizer >= 0.0, "tempered stable normalizer must be >= 0");
                   },
               },
               levy);
}

bool has_finite_activity(const LevySpec& levy) {
    return std::holds_alternative<NoJumps>(levy) || std::holds_alternative<CompoundPoisson>(levy);
}

LevySpec parse_levy(std::string_view text) {
    const auto parts = split(text, ':');
    const auto head = parts.front();
    const auto num = [&](std::size_t i) { return parse_number(parts.at(i), text); };
    LevySpec out;
    if (head == "none" && parts.size() == 1) {
        out = NoJumps{};
    } else if (head == "cp" && parts.size() >= 4) {
        CompoundPoisson cp;
        cp.intensity = num(1);
        std::size_t used = 0;
        if (parts[2] == "exp") {
            cp.jump_law = ExponentialJumps{num(3)};
            used = 4;
        } else if (parts[2] == "const") {
            cp.jump_law = ConstantJumps{num(3)};
            used = 4;
        } else if (parts[2] == "normal" && parts.size() >= 5) {
            cp.jump_law = GaussianJumps{num(3), num(4)};
            used = 5;
        } else {
            fail(ErrorKind::invalid_argument, "unknown jump law in levy spec '" + std::string(text) + "'");
        }
        if (parts.size() == used + 1 && parts[used] == "sym")
            cp.sign = JumpSign::two_sided;
        else if (parts.size() != used)
            fail(ErrorKind::invalid_argument, "trailing tokens in levy spec '" + std::string(text) + "'");
        out = cp;
    } else if (head == "stable" && (parts.size() == 2 || parts.size() == 3)) {
        out = AlphaStable{num(1), parts.size() == 3 ? num(2) : 1.0};
    } else if (head == "tstable" && parts.size() == 4) {
        out = TemperedStable{num(1), num(2), num(3)};
    } else {
        fail(ErrorKind::invalid_argument, "unrecognized levy spec '" + std::string(text) + "'");
    }
    validate(out);
    return out;
}

std::string format_levy(const LevySpec& levy) {
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const NoJumps&) { os << "none"; },
                   [&](const CompoundPoisson& cp) {
                       os << "cp:" << cp.intensity << ':';
                       std::visit(overloaded{
                                      [&](const ExponentialJumps& e) { os << "exp:" << e.rate; },
                                      [&](const GaussianJumps& g) { os << "normal:" << g.mean << ':' << g.std; },
                                      [&](const ConstantJumps& c) { os << "const:" << c.value; },
                                  },
                                  cp.jump_law);
                       if (cp.sign == JumpSign::two_sided) os << ":sym";
                   },
                   [&](const AlphaStable& s) { os << "stable:" << s.alpha << ':' << s.scale; },
                   [&](const TemperedStable& t) {
                       os << "tstable:" << t.alpha << ':' << t.tempering << ':' << t.normalizer;
                   },
               },
               levy);
    return os.str();
}

// ---------------------------------------------------------------------------
// ParametricModel
// ---------------------------------------------------------------------------

Eigen::VectorXd finite_difference_gradient(const DriftFn& f, const ParamVector& theta, double x) {
    Eigen::VectorXd grad(theta.size());
    ParamVector probe = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double h = 1e-6 * (1.0 + std::fabs(theta[i]));
        probe[i] = theta[i] + h;
        const double up = f(probe, x);
        probe[i] = theta[i] - h;
        const double down = f(probe, x);
        probe[i] = theta[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

Eigen::VectorXd ParametricModel::drift_gradient(const ParamVector& theta, double x) const {
    if (drift.grad_theta) return drift.grad_theta(theta, x);
    return finite_difference_gradient(drift.eval, theta, x);
}

Eigen::MatrixXd ParametricModel::drift_hessian(const ParamVector& theta, double x) const {
    if (drift.hess_theta) return drift.hess_theta(theta, x);
    const auto d = theta.size();
    Eigen::MatrixXd hess(d, d);
    ParamVector probe = theta;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double h = 1e-5 * (1.0 + std::fabs(theta[i]));
        probe[i] = theta[i] + h;
        const Eigen::VectorXd up = drift_gradient(probe, x);
        probe[i] = theta[i] - h;
        const Eigen::VectorXd down = drift_gradient(probe, x);
        probe[i] = theta[i];
        hess.col(i) = (up - down) / (2.0 * h);
    }
    return 0.5 * (hess + hess.transpose());
}

bool ParametricModel::in_bounds(const ParamVector& theta) const {
    if (theta.size() != param_dim) return false;
    for (int i = 0; i < param_dim; ++i)
        if (!param_bounds[i].contains(theta[i])) return false;
    return true;
}

ParamVector ParametricModel::project(const ParamVector& theta) const {
    ParamVector out = theta;
    for (int i = 0; i < param_dim; ++i) out[i] = param_bounds[i].clamp(theta[i]);
    return out;
}

void ParametricModel::validate_theta(const ParamVector& theta) const {
    if (theta.size() != param_dim)
        fail(ErrorKind::invalid_argument, "model '" + name + "' expects " + std::to_string(param_dim) +
                                              " parameters, got " + std::to_string(theta.size()));
    for (int i = 0; i < param_dim; ++i)
        if (!param_bounds[i].contains(theta[i]))
            fail(ErrorKind::invalid_argument,
                 "parameter " + std::to_string(i + 1) + " of model '" + name + "' outside its bounds");
}

std::vector<Interval> default_bounds(int dim) {
    return std::vector<Interval>(static_cast<std::size_t>(dim), Interval{-default_bound, default_bound});
}

ParametricModel ou_model(double sigma) {
    require(sigma > 0.0, "ou_model: sigma must be > 0");
    ParametricModel m;
    m.name = "ou";
    m.param_dim = 2;
    m.param_bounds = default_bounds(2);
    m.drift.eval = [](const ParamVector& th, double x) { return th[1] - th[0] * x; };
    m.drift.grad_theta = [](const ParamVector&, double x) { return Eigen::Vector2d(-x, 1.0).eval(); };
    m.drift.hess_theta = [](const ParamVector&, double) { return Eigen::MatrixXd::Zero(2, 2).eval(); };
    m.drift.has_closed_gradient = true;
    m.diffusion.eval = [sigma](double) { return sigma; };
    m.diffusion.lower_bound = sigma * sigma;
    m.jump_coeff = [](double) { return 1.0; };
    return m;
}

ParametricModel cir_model(double sigma) {
    require(sigma > 0.0, "cir_model: sigma must be > 0");
    ParametricModel m;
    m.name = "cir";
    m.param_dim = 2;
    m.param_bounds = default_bounds(2);
    m.drift.eval = [](const ParamVector& th, double x) { return th[0] - th[1] * x; };
    m.drift.grad_theta = [](const ParamVector&, double x) { return Eigen::Vector2d(1.0, -x).eval(); };
    m.drift.hess_theta = [](const ParamVector&, double) { return Eigen::MatrixXd::Zero(2, 2).eval(); };
    m.drift.has_closed_gradient = true;
    m.diffusion.eval = [sigma](double x) { return sigma * std::sqrt(std::max(x, 0.0)); };
    m.diffusion.lower_bound = 0.0;
    m.jump_coeff = [](double) { return 1.0; };
    m.skip_degenerate_points = true;
    return m;
}

ParametricModel hyperbolic_model(double sigma) {
    require(sigma > 0.0, "hyperbolic_model: sigma must be > 0");
    ParametricModel m;
    m.name = "hyperbolic";
    m.param_dim = 1;
    m.param_bounds = default_bounds(1);
    m.drift.eval = [](const ParamVector& th, double x) { return -th[0] * x / std::sqrt(1.0 + x * x); };
    m.drift.grad_theta = [](const ParamVector&, double x) {
        Eigen::VectorXd g(1);
        g[0] = -x / std::sqrt(1.0 + x * x);
        return g;
    };
    m.drift.hess_theta = [](const ParamVector&, double) { return Eigen::MatrixXd::Zero(1, 1).eval(); };
    m.drift.has_closed_gradient = true;
    m.diffusion.eval = [sigma](double) { return sigma; };
    m.diffusion.lower_bound = sigma * sigma;
    m.jump_coeff = [](double) { return 1.0; };
    return m;
}

int builtin_param_dim(std::string_view name) {
    if (name == "ou" || name == "cir") return 2;
    if (name == "hyperbolic") return 1;
    fail(ErrorKind::invalid_argument, "unknown model '" + std::string(name) + "' (expected ou, cir, hyperbolic)");
}

ParametricModel make_model(std::string_view name, double sigma, const LevySpec& levy) {
    ModelSpec spec;
    spec.name = std::string(name);
    spec.sigma = sigma;
    spec.levy = levy;
    return make_model(spec);
}

ParametricModel make_model(const ModelSpec& spec) {
    validate(spec.levy);
    ParametricModel m;
    if (spec.name == "ou")
        m = ou_model(spec.sigma);
    else if (spec.name == "cir")
        m = cir_model(spec.sigma);
    else if (spec.name == "hyperbolic")
        m = hyperbolic_model(spec.sigma);
    else
        fail(ErrorKind::invalid_argument,
             "unknown model '" + spec.name + "' (expected ou, cir, hyperbolic)");
    m.levy = spec.levy;
    if (!spec.bounds.empty()) {
        require(static_cast<int>(spec.bounds.size()) == m.param_dim,
                "bounds length does not match the model's parameter dimension");
        for (const auto& b : spec.bounds) require(b.lo <= b.hi, "bounds must satisfy lo <= hi");
        m.param_bounds = spec.bounds;
    }
    return m;
}

// ---------------------------------------------------------------------------
// check_model
// ---------------------------------------------------------------------------

ModelCheckReport check_model(const ParametricModel& model, int probe_count, std::uint64_t seed,
                             const ModelCheckOptions& options) {
    require(probe_count >= 1, "check_model: probe_count must be >= 1");
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    ModelCheckReport report;
    report.probes = probe_count;
    report.min_sigma_squared = std::numeric_limits<double>::infinity();
    report.min_abs_gamma = std::numeric_limits<double>::infinity();

    ParamVector theta(model.param_dim);
    for (int k = 0; k < probe_count; ++k) {
        for (int i = 0; i < model.param_dim; ++i) {
            const double lo = std::max(model.param_bounds[i].lo, -options.theta_range);
            const double hi = std::min(model.param_bounds[i].hi, options.theta_range);
            theta[i] = lo + (hi - lo) * unit(rng);
        }
        const double x = options.x_lo + (options.x_hi - options.x_lo) * unit(rng);

        const Eigen::VectorXd grad = model.drift_gradient(theta, x);
        const Eigen::VectorXd fd = finite_difference_gradient(model.drift.eval, theta, x);
        const double err = (grad - fd).cwiseAbs().maxCoeff() / (1.0 + grad.cwiseAbs().maxCoeff());
        report.max_gradient_error = std::max(report.max_gradient_error, err);

        const Eigen::MatrixXd hess = model.drift_hessian(theta, x);
        report.max_hessian_asymmetry =
            std::max(report.max_hessian_asymmetry, (hess - hess.transpose()).norm());

        const double s = model.sigma_at(x);
        if (s * s < report.min_sigma_squared) {
            report.min_sigma_squared = s * s;
            report.argmin_sigma_x = x;
        }
        report.min_abs_gamma = std::min(report.min_abs_gamma, std::fabs(model.gamma_at(x)));
    }
    // σ at the probe-range origin catches diffusions that vanish exactly at 0.
    if (options.x_lo <= 0.0 && 0.0 <= options.x_hi) {
        const double s0 = model.sigma_at(0.0);
        if (s0 * s0 < report.min_sigma_squared) {
            report.min_sigma_squared = s0 * s0;
            report.argmin_sigma_x = 0.0;
        }
    }

    report.gradient_ok = report.max_gradient_error < options.gradient_tolerance;
    report.hessian_ok = report.max_hessian_asymmetry <= 1e-12;
    report.nondegenerate_ok = report.min_sigma_squared > 0.0 &&
                              report.min_sigma_squared >= model.diffusion.lower_bound;

    std::ostringstream note;
    if (!report.gradient_ok) {
        note << "drift gradient disagrees with finite differences (max rel. error "
             << report.max_gradient_error << ")";
        report.notes.push_back(note.str());
        note.str("");
    }
    if (!report.hessian_ok) report.notes.push_back("drift Hessian is not symmetric");
    if (!report.nondegenerate_ok) {
        note << "non-degeneracy violated: sigma^2 = " << report.min_sigma_squared << " at x = "
             << report.argmin_sigma_x;
        if (model.skip_degenerate_points)
            note << " (sigma(x) = 0 for x <= 0 is the boundary of the state space; such points are "
                    "skipped in estimation)";
        report.notes.push_back(note.str());
        note.str("");
    }
    if (report.min_abs_gamma < 1.0) {
        note << "warning: jump coefficient |gamma| drops to " << report.min_abs_gamma
             << " (< 1) on the probe range";
        report.notes.push_back(note.str());
    }
    return report;
}

}  // namespace levydrift

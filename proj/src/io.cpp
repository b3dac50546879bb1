#include "levydrift/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "levydrift/errors.hpp"
#include "levydrift/simulate.hpp"

namespace levydrift {

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_path_csv(std::ostream& os, const SamplePath& path, bool decompose) {
    if (decompose && !path.has_decomposition())
        fail(ErrorKind::unsupported, "path carries no continuous/jump decomposition");
    const auto old_precision = os.precision(17);
    os << (decompose ? "t,x,xc,xj\n" : "t,x\n");
    for (std::size_t k = 0; k < path.values.size(); ++k) {
        os << path.times[k] << ',' << path.values[k];
        if (decompose) os << ',' << path.cont_part[k] << ',' << path.jump_part[k];
        os << '\n';
    }
    os.precision(old_precision);
}

void write_observations_csv(std::ostream& os, const Observations& obs) {
    const auto old_precision = os.precision(17);
    os << "t,x\n";
    for (std::size_t i = 0; i < obs.values.size(); ++i) os << obs.times[i] << ',' << obs.values[i] << '\n';
    os.precision(old_precision);
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_cell(std::string_view cell, std::size_t line_no, std::string_view column) {
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc() || ptr != end)
        fail(ErrorKind::io,
             "line " + std::to_string(line_no) + ": column '" + std::string(column) + "' is not a number: '" +
                 std::string(cell) + "'",
             line_no);
    return value;
}

}  // namespace

Observations read_observations_csv(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) fail(ErrorKind::io, "CSV input is empty");
    ++line_no;
    const auto header = split_fields(line);
    std::size_t t_col = header.size();
    std::size_t x_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "t") t_col = c;
        if (header[c] == "x") x_col = c;
    }
    if (t_col == header.size() || x_col == header.size())
        fail(ErrorKind::io, "line 1: CSV header must contain columns 't' and 'x'", 1);

    std::vector<double> times;
    std::vector<double> values;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() <= std::max(t_col, x_col))
            fail(ErrorKind::io, "line " + std::to_string(line_no) + ": too few columns", line_no);
        const double t = parse_cell(fields[t_col], line_no, "t");
        const double x = parse_cell(fields[x_col], line_no, "x");
        if (!times.empty() && t < times.back())
            fail(ErrorKind::io, "line " + std::to_string(line_no) + ": times must be non-decreasing", line_no);
        times.push_back(t);
        values.push_back(x);
    }
    if (times.size() < 2) fail(ErrorKind::io, "CSV needs at least two observations");
    try {
        return Observations::from_series(std::move(times), std::move(values));
    } catch (const Error& e) {
        fail(ErrorKind::io, std::string("CSV data rejected: ") + e.what());
    }
}

Observations read_observations_csv_file(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) fail(ErrorKind::io, "cannot open '" + filename + "'");
    return read_observations_csv(in);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double number_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        fail(ErrorKind::invalid_argument, std::string("JSON: missing numeric field '") + key + "'");
    return j.at(key).get<double>();
}

}  // namespace

nlohmann::json levy_to_json(const LevySpec& levy) {
    return std::visit(
        overloaded{
            [](const NoJumps&) { return nlohmann::json{{"type", "none"}}; },
            [](const CompoundPoisson& cp) {
                nlohmann::json law = std::visit(
                    overloaded{
                        [](const ExponentialJumps& e) { return nlohmann::json{{"type", "exponential"}, {"rate", e.rate}}; },
                        [](const GaussianJumps& g) {
                            return nlohmann::json{{"type", "normal"}, {"mean", g.mean}, {"std", g.std}};
                        },
                        [](const ConstantJumps& c) { return nlohmann::json{{"type", "constant"}, {"value", c.value}}; },
                    },
                    cp.jump_law);
                return nlohmann::json{{"type", "compound_poisson"},
                                      {"intensity", cp.intensity},
                                      {"jump_law", law},
                                      {"sign", cp.sign == JumpSign::two_sided ? "two_sided" : "positive"}};
            },
            [](const AlphaStable& s) {
                return nlohmann::json{{"type", "alpha_stable"}, {"alpha", s.alpha}, {"scale", s.scale}};
            },
            [](const TemperedStable& t) {
                return nlohmann::json{{"type", "tempered_stable"},
                                      {"alpha", t.alpha},
                                      {"tempering", t.tempering},
                                      {"normalizer", t.normalizer}};
            },
        },
        levy);
}

LevySpec levy_from_json(const nlohmann::json& j) {
    if (j.is_string()) return parse_levy(j.get<std::string>());
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        fail(ErrorKind::invalid_argument, "JSON: levy must be a grammar string or an object with a 'type'");
    const auto type = j.at("type").get<std::string>();
    LevySpec out;
    if (type == "none") {
        out = NoJumps{};
    } else if (type == "compound_poisson") {
        CompoundPoisson cp;
        cp.intensity = number_field(j, "intensity");
        const auto& law = j.at("jump_law");
        const auto law_type = law.value("type", std::string{});
        if (law_type == "exponential")
            cp.jump_law = ExponentialJumps{number_field(law, "rate")};
        else if (law_type == "normal")
            cp.jump_law = GaussianJumps{number_field(law, "mean"), number_field(law, "std")};
        else if (law_type == "constant")
            cp.jump_law = ConstantJumps{number_field(law, "value")};
        else
            fail(ErrorKind::invalid_argument, "JSON: unknown jump_law type '" + law_type + "'");
        const auto sign = j.value("sign", std::string("positive"));
        if (sign == "two_sided")
            cp.sign = JumpSign::two_sided;
        else if (sign != "positive")
            fail(ErrorKind::invalid_argument, "JSON: sign must be 'positive' or 'two_sided'");
        out = cp;
    } else if (type == "alpha_stable") {
        out = AlphaStable{number_field(j, "alpha"), j.contains("scale") ? number_field(j, "scale") : 1.0};
    } else if (type == "tempered_stable") {
        out = TemperedStable{number_field(j, "alpha"), number_field(j, "tempering"), number_field(j, "normalizer")};
    } else {
        fail(ErrorKind::invalid_argument, "JSON: unknown levy type '" + type + "'");
    }
    validate(out);
    return out;
}

nlohmann::json model_spec_to_json(const ModelSpec& spec) {
    nlohmann::json j{{"name", spec.name}, {"sigma", spec.sigma}, {"levy", levy_to_json(spec.levy)}};
    nlohmann::json bounds = nlohmann::json::array();
    for (const auto& b : spec.bounds) bounds.push_back({b.lo, b.hi});
    j["bounds"] = bounds;
    return j;
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("name") || !j.at("name").is_string())
        fail(ErrorKind::invalid_argument, "JSON: model spec needs a 'name'");
    ModelSpec spec;
    spec.name = j.at("name").get<std::string>();
    if (j.contains("sigma")) spec.sigma = number_field(j, "sigma");
    if (j.contains("levy")) spec.levy = levy_from_json(j.at("levy"));
    if (j.contains("bounds")) {
        for (const auto& b : j.at("bounds")) {
            if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
                fail(ErrorKind::invalid_argument, "JSON: bounds entries must be [lo, hi]");
            spec.bounds.push_back({b[0].get<double>(), b[1].get<double>()});
        }
    }
    return spec;
}

}  // namespace levydrift

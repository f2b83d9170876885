#include "adrc/io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include <json.hpp>

namespace adrc {

using json = nlohmann::json;

std::string format_number(double v) {
    if (!std::isfinite(v)) throw DomainError(fmt::format("cannot serialize non-finite value {}", v));
    return fmt::format("{:.17g}", v);
}

namespace {

std::string number_array(const Vector& v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_number(v(i));
    }
    return out + "]";
}

std::string coefficient_body(const TfCoefficients& c, const std::string& indent) {
    std::string out;
    out += fmt::format("{}\"variant\": \"{}\",\n", indent, to_string(c.variant));
    out += fmt::format("{}\"alpha\": {},\n", indent, number_array(c.alpha));
    out += fmt::format("{}\"beta\": {},\n", indent, number_array(c.beta));
    out += fmt::format("{}\"gamma\": {}", indent, number_array(c.gamma));
    if (c.variant == TfVariant::DualFeedback)
        out += fmt::format(",\n{}\"k1_over_b0\": {}", indent, format_number(c.k1_over_b0));
    return out;
}

Vector vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    Vector v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
    return v;
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Matrix matrix_from(const json& j) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Vector r = vector_from(j.at(static_cast<std::size_t>(i)));
        if (r.size() != cols) throw ShapeError("matrix rows differ in length");
        M.row(i) = r.transpose();
    }
    return M;
}

json matrix_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) rows.push_back(vector_json(M.row(i).transpose()));
    return rows;
}

AdrcDesign design_from(const json& j) {
    AdrcDesign d;
    d.order = j.at("n").get<int>();
    d.b0 = j.at("b0").get<double>();
    d.omega_cl = j.at("omega_cl").get<double>();
    d.k_eso = j.at("k_eso").get<double>();
    d.T = j.at("T").get<double>();
    return d;
}

template <typename F>
auto with_json_errors(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw DomainError(fmt::format("malformed {}: {}", what, e.what()));
    }
}

}  // namespace

std::string coefficients_to_json(const AdrcDesign& d, const TfCoefficients& c,
                                 const std::optional<CoefficientCheck>& check) {
    std::string out = "{\n";
    out += fmt::format("  \"design\": {{\"n\": {}, \"b0\": {}, \"omega_cl\": {}, \"k_eso\": {}, \"T\": {}}},\n", d.order,
                       format_number(d.b0), format_number(d.omega_cl), format_number(d.k_eso), format_number(d.T));
    out += coefficient_body(c, "  ");
    if (check) {
        out += ",\n  \"oracle\": {\n" + coefficient_body(check->oracle, "    ") + "\n  },\n";
        out += fmt::format("  \"max_relative_deviation\": {}", format_number(check->max_relative_deviation));
    }
    return out + "\n}\n";
}

std::string coefficients_to_csv(const AdrcDesign& d, const TfCoefficients& c,
                                const std::optional<CoefficientCheck>& check) {
    std::string out = "name,value\n";
    out += fmt::format("n,{}\nb0,{}\nomega_cl,{}\nk_eso,{}\nT,{}\n", d.order, format_number(d.b0),
                       format_number(d.omega_cl), format_number(d.k_eso), format_number(d.T));
    out += fmt::format("variant,{}\n", to_string(c.variant));
    auto rows = [&out](const TfCoefficients& tf, const std::string& prefix) {
        for (Eigen::Index i = 0; i < tf.alpha.size(); ++i)
            out += fmt::format("{}alpha{},{}\n", prefix, i + 1, format_number(tf.alpha(i)));
        for (Eigen::Index i = 0; i < tf.beta.size(); ++i)
            out += fmt::format("{}beta{},{}\n", prefix, i, format_number(tf.beta(i)));
        for (Eigen::Index i = 0; i < tf.gamma.size(); ++i)
            out += fmt::format("{}gamma{},{}\n", prefix, i, format_number(tf.gamma(i)));
        if (tf.variant == TfVariant::DualFeedback)
            out += fmt::format("{}k1_over_b0,{}\n", prefix, format_number(tf.k1_over_b0));
    };
    rows(c, "");
    if (check) {
        rows(check->oracle, "oracle_");
        out += fmt::format("max_relative_deviation,{}\n", format_number(check->max_relative_deviation));
    }
    return out;
}

CoefficientFile coefficients_from_json(const std::string& text) {
    return with_json_errors("coefficient file", [&] {
        const json j = json::parse(text);
        CoefficientFile f;
        f.design = design_from(j.at("design"));
        f.coefficients.variant = tf_variant_from_string(j.at("variant").get<std::string>());
        f.coefficients.alpha = vector_from(j.at("alpha"));
        f.coefficients.beta = vector_from(j.at("beta"));
        f.coefficients.gamma = vector_from(j.at("gamma"));
        if (f.coefficients.variant == TfVariant::DualFeedback)
            f.coefficients.k1_over_b0 = j.at("k1_over_b0").get<double>();
        return f;
    });
}

CoefficientFile coefficients_from_csv(const std::string& text) {
    std::map<std::string, std::string> rows;
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line == "name,value") continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DomainError(fmt::format("malformed coefficient row '{}'", line));
        rows[line.substr(0, comma)] = line.substr(comma + 1);
    }
    auto number = [&rows](const std::string& key) {
        const auto it = rows.find(key);
        if (it == rows.end()) throw DomainError(fmt::format("coefficient file lacks '{}'", key));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(it->second, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used == 0 || used != it->second.size())
            throw DomainError(fmt::format("'{}' is not a number", it->second));
        return v;
    };
    auto series = [&](const std::string& prefix, int first) {
        std::vector<double> values;
        for (int i = first; rows.count(prefix + std::to_string(i)); ++i) values.push_back(number(prefix + std::to_string(i)));
        return Vector(Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
    };

    CoefficientFile f;
    f.design.order = static_cast<int>(number("n"));
    f.design.b0 = number("b0");
    f.design.omega_cl = number("omega_cl");
    f.design.k_eso = number("k_eso");
    f.design.T = number("T");
    if (!rows.count("variant")) throw DomainError("coefficient file lacks 'variant'");
    f.coefficients.variant = tf_variant_from_string(rows["variant"]);
    f.coefficients.alpha = series("alpha", 1);
    f.coefficients.beta = series("beta", 0);
    f.coefficients.gamma = series("gamma", 0);
    if (f.coefficients.variant == TfVariant::DualFeedback) f.coefficients.k1_over_b0 = number("k1_over_b0");
    return f;
}

CoefficientFile coefficients_from_text(const std::string& text) {
    const auto pos = text.find_first_not_of(" \t\r\n");
    if (pos != std::string::npos && text[pos] == '{') return coefficients_from_json(text);
    return coefficients_from_csv(text);
}

// ---------------------------------------------------------------------------

std::string scenario_to_json(const Scenario& s) {
    nlohmann::ordered_json j;
    j["name"] = s.name;
    j["duration"] = s.duration;
    j["initial_reference"] = s.initial_reference;
    j["initial_load"] = s.initial_load;
    j["events"] = nlohmann::ordered_json::array();
    for (const auto& e : s.events) j["events"].push_back({{"t", e.t}, {"kind", to_string(e.kind)}, {"value", e.value}});
    j["noise"] = {{"sigma", s.noise.sigma}, {"seed", s.noise.seed}};
    j["delay_samples"] = s.delay_samples;

    const ControllerSpec& c = s.controller;
    j["controller"] = {{"design", {{"n", c.design.order}, {"b0", c.design.b0}, {"omega_cl", c.design.omega_cl},
                                   {"k_eso", c.design.k_eso}, {"T", c.design.T}}},
                       {"structure", to_string(c.variant.structure)},
                       {"signal", to_string(c.variant.signal)},
                       {"gains", to_string(c.gains)},
                       {"warm_start", c.warm_start},
                       {"feed_unlimited", c.feed_unlimited}};
    if (s.limiter)
        j["limiter"] = {{"u_min", s.limiter->u_min},
                        {"u_max", s.limiter->u_max},
                        {"rate_max", s.limiter->rate_max},
                        {"magnitude", s.limiter->magnitude_enabled},
                        {"rate", s.limiter->rate_enabled}};
    if (const auto* b = std::get_if<BuckParams>(&s.plant)) {
        j["plant"] = {{"type", "buck"}, {"C_out", b->C_out}, {"R_base", b->R_base},
                      {"V_in", b->V_in},  {"L", b->L},         {"v0", b->v0}};
    } else {
        const auto& p = std::get<LtiPlantSpec>(s.plant);
        j["plant"] = {{"type", "lti"},
                      {"A", nlohmann::ordered_json(matrix_json(p.A))},
                      {"b", nlohmann::ordered_json(vector_json(p.b))},
                      {"c", nlohmann::ordered_json(vector_json(p.c.transpose()))}};
        if (p.x0.size() > 0) j["plant"]["x0"] = nlohmann::ordered_json(vector_json(p.x0));
    }
    if (s.setpoint_filter)
        j["setpoint_filter"] = {{"time_constant", s.setpoint_filter->time_constant},
                                {"apply_to", to_string(s.setpoint_filter->apply_to)}};
    if (s.divergence_guard) j["divergence_guard"] = *s.divergence_guard;
    if (s.record_state) j["record_state"] = true;
    return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
    Scenario s = with_json_errors("scenario", [&] {
        const json j = json::parse(text);
        Scenario s;
        s.name = j.value("name", std::string{});
        s.duration = j.at("duration").get<double>();
        s.initial_reference = j.value("initial_reference", 0.0);
        s.initial_load = j.value("initial_load", 0.0);
        for (const auto& e : j.value("events", json::array()))
            s.events.push_back({e.at("t").get<double>(), event_kind_from_string(e.at("kind").get<std::string>()),
                                e.at("value").get<double>()});
        if (j.contains("noise")) {
            s.noise.sigma = j["noise"].value("sigma", 0.0);
            s.noise.seed = j["noise"].value("seed", std::uint64_t{0});
        }
        s.delay_samples = j.value("delay_samples", 1);

        const json& c = j.at("controller");
        s.controller.design = design_from(c.at("design"));
        s.controller.variant.structure = structure_from_string(c.value("structure", std::string{"ss"}));
        s.controller.variant.signal = signal_from_string(c.value("signal", std::string{"output"}));
        s.controller.gains = gain_method_from_string(c.value("gains", std::string{"dt"}));
        s.controller.warm_start = c.value("warm_start", false);
        s.controller.feed_unlimited = c.value("feed_unlimited", false);

        if (j.contains("limiter")) {
            const json& l = j["limiter"];
            LimiterSpec spec;
            spec.u_min = l.value("u_min", 0.0);
            spec.u_max = l.value("u_max", 0.0);
            spec.rate_max = l.value("rate_max", 0.0);
            spec.magnitude_enabled = l.value("magnitude", l.contains("u_max"));
            spec.rate_enabled = l.value("rate", l.contains("rate_max"));
            s.limiter = spec;
        }

        const json& p = j.at("plant");
        const std::string type = p.at("type").get<std::string>();
        if (type == "buck") {
            BuckParams b;
            b.C_out = p.value("C_out", b.C_out);
            b.R_base = p.value("R_base", b.R_base);
            b.V_in = p.value("V_in", b.V_in);
            b.L = p.value("L", b.L);
            b.v0 = p.value("v0", b.v0);
            s.plant = b;
        } else if (type == "first_order") {
            LtiPlantSpec lti = first_order_plant(p.value("gain", 1.0), p.value("time_constant", 1.0));
            if (p.contains("y0")) lti.x0 = Vector::Constant(1, p["y0"].get<double>());
            s.plant = lti;
        } else if (type == "lti") {
            LtiPlantSpec lti;
            lti.A = matrix_from(p.at("A"));
            lti.b = vector_from(p.at("b"));
            lti.c = vector_from(p.at("c")).transpose();
            if (p.contains("x0")) lti.x0 = vector_from(p["x0"]);
            s.plant = lti;
        } else {
            throw DomainError(fmt::format("unknown plant type '{}' (expected buck, first_order or lti)", type));
        }

        if (j.contains("setpoint_filter")) {
            const json& f = j["setpoint_filter"];
            s.setpoint_filter = SetpointFilterSpec{f.at("time_constant").get<double>(),
                                                   filter_target_from_string(f.value("apply_to", std::string{"error"}))};
        }
        if (j.contains("divergence_guard")) s.divergence_guard = j["divergence_guard"].get<double>();
        s.record_state = j.value("record_state", false);
        return s;
    });
    s.validate();
    return s;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write '{}'", path));
    out << text;
    if (!out) throw Error(fmt::format("write to '{}' failed", path));
}

Scenario load_scenario(const std::string& path) { return scenario_from_json(read_text_file(path)); }

void write_trace_csv(std::ostream& os, const Trace& tr) {
    os << "t,r,r_filtered,y_clean,y_measured,u,u_lim,lim_mag,lim_rate\n";
    for (std::size_t k = 0; k < tr.size(); ++k) {
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{}\n", tr.t[k], tr.r[k],
                          tr.r_filtered[k], tr.y_clean[k], tr.y_measured[k], tr.u[k], tr.u_lim[k],
                          tr.lim_mag[k] ? 1 : 0, tr.lim_rate[k] ? 1 : 0);
    }
}

std::string trace_to_csv(const Trace& trace) {
    std::ostringstream ss;
    write_trace_csv(ss, trace);
    return ss.str();
}

}  // namespace adrc

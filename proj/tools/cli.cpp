#include "cli.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <json.hpp>

#include "adrc/controllers.hpp"
#include "adrc/discretize.hpp"
#include "adrc/io.hpp"
#include "adrc/sim.hpp"
#include "adrc/tuning.hpp"

namespace adrc::cli {

namespace {

using json = nlohmann::json;

struct DesignFlags {
    int order = 1;
    double b0 = 1.0;
    double omega = 0.0;
    double keso = 10.0;
    double ts = 0.0;

    AdrcDesign design() const { return AdrcDesign{order, b0, omega, keso, ts}; }
};

void add_design_flags(CLI::App* app, DesignFlags& f) {
    app->add_option("--order", f.order, "plant order n")->capture_default_str();
    app->add_option("--b0", f.b0, "plant gain estimate")->capture_default_str();
    app->add_option("--omega", f.omega, "closed-loop bandwidth [rad/s]")->required();
    app->add_option("--keso", f.keso, "observer bandwidth factor")->capture_default_str();
    app->add_option("--ts", f.ts, "sampling interval [s]")->required();
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty())
        out << text;
    else
        write_text_file(path, text);
}

std::string json_numbers(const Vector& v) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v(i));
    return s + "]";
}

// ---------------------------------------------------------------------------

struct TuneArgs {
    DesignFlags design;
    std::string method = "dt";
    std::string format = "json";
    std::string out;
};

int cmd_tune(const TuneArgs& a, std::ostream& out, std::ostream& err) {
    const AdrcDesign d = a.design.design();
    d.validate();
    const GainMethod method = gain_method_from_string(a.method);
    const GainSet g = design_gains(d, method);
    const PoleLocations z = dt_pole_locations(d);
    const auto warnings = d.warnings();
    for (const auto& w : warnings) err << "warning: " << w << "\n";

    std::string text;
    if (a.format == "csv") {
        text = "name,value\n";
        for (Eigen::Index i = 0; i < g.k.size(); ++i) text += fmt::format("k{},{}\n", i + 1, format_number(g.k(i)));
        for (Eigen::Index i = 0; i < g.l.size(); ++i) text += fmt::format("l{},{}\n", i + 1, format_number(g.l(i)));
        text += fmt::format("z_cl,{}\nz_eso,{}\n", format_number(z.z_cl), format_number(z.z_eso));
    } else {
        json w = json::array();
        for (const auto& s : warnings) w.push_back(s);
        text = "{\n";
        text += fmt::format("  \"method\": \"{}\",\n", to_string(method));
        text += fmt::format("  \"design\": {{\"n\": {}, \"b0\": {}, \"omega_cl\": {}, \"k_eso\": {}, \"T\": {}}},\n",
                            d.order, format_number(d.b0), format_number(d.omega_cl), format_number(d.k_eso),
                            format_number(d.T));
        text += fmt::format("  \"k\": {},\n  \"l\": {},\n", json_numbers(g.k), json_numbers(g.l));
        text += fmt::format("  \"z_cl\": {},\n  \"z_eso\": {},\n", format_number(z.z_cl), format_number(z.z_eso));
        text += fmt::format("  \"warnings\": {}\n}}\n", w.dump());
    }
    emit(text, a.out, out);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct CoeffsArgs {
    DesignFlags design;
    std::string variant;
    std::string flavor = "output";
    bool via_oracle = false;
    bool check = false;
    std::string format = "json";
    std::string out;
};

int cmd_coeffs(const CoeffsArgs& a, std::ostream& out, std::ostream&) {
    const AdrcDesign d = a.design.design();
    d.validate();
    const TfVariant variant = tf_variant_from_string(a.variant);
    signal_from_string(a.flavor);  // both flavors share the coefficient set

    if (d.order > 2 && !a.via_oracle)
        throw UnsupportedOrderError(
            fmt::format("closed-form coefficients exist for n <= 2 only (got n = {}); pass --via-oracle", d.order));
    if (d.order > 2 && a.check) throw UnsupportedOrderError("--check needs a closed form, i.e. n <= 2");

    std::optional<TfCoefficients> oracle;
    if (a.via_oracle || a.check)
        oracle = tf_coefficients_oracle(d, dt_controller_gains(d), dt_observer_gains(d), variant);

    const TfCoefficients primary = a.via_oracle ? *oracle : tf_coefficients_closed_form(d, variant);
    std::optional<CoefficientCheck> check;
    if (a.check) {
        const TfCoefficients closed = tf_coefficients_closed_form(d, variant);
        check = CoefficientCheck{*oracle, max_relative_deviation(closed, *oracle)};
    }

    emit(a.format == "csv" ? coefficients_to_csv(d, primary, check) : coefficients_to_json(d, primary, check), a.out,
         out);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string scenario;
    std::string variant;
    std::string flavor;
    std::string gains;
    std::string coeffs;
    std::string out;
};

void apply_overrides(Scenario& s, const std::string& variant, const std::string& flavor, const std::string& gains) {
    if (!variant.empty()) s.controller.variant.structure = structure_from_string(variant);
    if (!flavor.empty()) s.controller.variant.signal = signal_from_string(flavor);
    if (!gains.empty()) s.controller.gains = gain_method_from_string(gains);
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    Scenario s = load_scenario(a.scenario);
    apply_overrides(s, a.variant, a.flavor, a.gains);

    if (!a.coeffs.empty()) {
        if (s.controller.variant.structure == Structure::StateSpace)
            throw UsageError("--coeffs needs a transfer-function variant (single or dual)");
        const CoefficientFile f = coefficients_from_text(read_text_file(a.coeffs));
        if (!(f.design == s.controller.design))
            throw ShapeError("coefficient file design does not match the scenario's controller design");
        s.controller.coefficients = f.coefficients;
    }

    Trace tr;
    try {
        tr = run_scenario(s);
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDivergence;
    }

    // Summary goes to stderr when the trace itself occupies stdout.
    std::ostream& report = a.out.empty() ? err : out;
    if (a.out.empty())
        write_trace_csv(out, tr);
    else
        write_text_file(a.out, trace_to_csv(tr));

    const StepMetrics m = step_metrics(tr);
    report << fmt::format("variant {} samples {}\n", to_string(s.controller.variant), tr.size());
    report << fmt::format("settling_time_2pct {:.6g} s\novershoot {:.6g} %\nmax_abs_u_lim {:.6g}\nsaturation_duty {:.6g}\n",
                          m.settling_time, m.overshoot_percent, m.max_abs_u_lim, m.saturation_duty);
    if (s.controller.variant.structure == Structure::SingleTf && m.saturation_duty > 0.0)
        err << "warning: single-TF controller saturated; only its clamped accumulator protects against windup\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
    std::string scenario;
    std::vector<std::string> controllers;
    std::vector<std::string> windows;
    std::string format = "text";
    std::string out;
};

ControllerVariant parse_variant(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos)
        throw UsageError(fmt::format("controller '{}' must look like structure/flavor, e.g. dual/error", text));
    return {structure_from_string(text.substr(0, slash)), signal_from_string(text.substr(slash + 1))};
}

Window parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError(fmt::format("window '{}' must look like t0:t1", text));
    try {
        Window w{std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
        if (!(w.t0 < w.t1)) throw UsageError(fmt::format("window '{}' needs t0 < t1", text));
        return w;
    } catch (const std::logic_error&) {
        throw UsageError(fmt::format("window '{}' must look like t0:t1", text));
    }
}

bool realization_pair(const ControllerVariant& v) { return v.structure != Structure::SingleTf; }

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
    if (a.controllers.size() < 2) throw UsageError("compare needs at least two --controller specs");
    const Scenario s = load_scenario(a.scenario);

    std::vector<ControllerSpec> specs;
    for (const auto& text : a.controllers) {
        ControllerSpec c = s.controller;
        c.variant = parse_variant(text);
        c.coefficients.reset();
        specs.push_back(c);
    }
    std::vector<Window> windows;
    for (const auto& w : a.windows) windows.push_back(parse_window(w));
    if (windows.empty()) windows = event_windows(s);

    std::vector<Trace> traces;
    try {
        traces = run_lockstep(s, specs);
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDivergence;
    }

    bool all_pass = true;
    json report = {{"scenario", s.name}, {"pairs", json::array()}};
    std::string text;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        for (std::size_t j = i + 1; j < specs.size(); ++j) {
            const ControllerVariant va = specs[i].variant, vb = specs[j].variant;
            const bool same_flavor = va.signal == vb.signal;
            const bool both_feedback = realization_pair(va) && realization_pair(vb);
            // Unsaturated agreement is all that is claimed for the single-TF structure.
            const double t_limit = std::min(first_limited_sample(traces[i]), first_limited_sample(traces[j])) * s.T();

            json pair = {{"a", to_string(va)}, {"b", to_string(vb)}, {"windows", json::array()}};
            text += fmt::format("{} vs {}\n", to_string(va), to_string(vb));
            text += fmt::format("  {:>12} {:>12} {:>14} {:>14}  {}\n", "t0", "t1", "max_abs_du", "max_abs_dy", "status");
            for (const Window& w : windows) {
                const TraceDifference d = compare_traces(traces[i], traces[j], w.t0, w.t1);
                double tol = 0.0;
                bool checked = false;
                if (both_feedback) {
                    checked = same_flavor || (reference_constant(traces[i], w) && reference_constant(traces[j], w));
                    tol = 1e-9;
                } else if (same_flavor) {
                    checked = w.t1 <= t_limit + 1e-9 * s.T();
                    tol = 1e-8;
                }
                const bool pass = !checked || d.max_abs_du <= tol;
                all_pass = all_pass && pass;
                const char* status = !checked ? "info" : (pass ? "ok" : "FAIL");
                text += fmt::format("  {:>12.6g} {:>12.6g} {:>14.6g} {:>14.6g}  {}\n", w.t0, w.t1, d.max_abs_du,
                                    d.max_abs_dy, status);
                json jw = {{"t0", w.t0},
                           {"t1", w.t1},
                           {"max_abs_du", d.max_abs_du},
                           {"max_abs_dy", d.max_abs_dy},
                           {"checked", checked},
                           {"pass", pass}};
                if (checked) jw["tolerance"] = tol;
                pair["windows"].push_back(jw);
            }
            report["pairs"].push_back(pair);
        }
    }
    report["pass"] = all_pass;
    text += all_pass ? "equivalence: ok\n" : "equivalence: FAILED\n";

    emit(a.format == "json" ? report.dump(2) + "\n" : text, a.out, out);
    return all_pass ? kExitOk : kExitEquivalence;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
    int order = 1;
    double xmin = 1e-3;
    double xmax = 1.0;
    int points = 100;
    bool log = false;
    std::string out;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream&) {
    if (a.order != 1 && a.order != 2) throw UsageError(fmt::format("--order must be 1 or 2 (got {})", a.order));
    if (!(a.xmin > 0.0) || !(a.xmin < a.xmax)) throw UsageError("sweep range needs 0 < xmin < xmax");
    if (a.points < 2) throw UsageError("--points must be >= 2");

    std::string text = a.order == 1 ? "x,ratio_k1\n" : "x,ratio_k1,ratio_k2\n";
    for (int i = 0; i < a.points; ++i) {
        const double f = static_cast<double>(i) / (a.points - 1);
        double x = a.log ? a.xmin * std::pow(a.xmax / a.xmin, f) : a.xmin + (a.xmax - a.xmin) * f;
        if (i == a.points - 1) x = a.xmax;
        const Vector r = ct_dt_gain_ratio(a.order, x);
        text += format_number(x);
        for (Eigen::Index j = 0; j < r.size(); ++j) text += "," + format_number(r(j));
        text += "\n";
    }
    emit(text, a.out, out);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete-time linear ADRC: tuning, coefficients, simulation", "adrc"};
    app.require_subcommand(1);

    TuneArgs tune;
    auto* t = app.add_subcommand("tune", "controller and observer gains");
    add_design_flags(t, tune.design);
    t->add_option("--method", tune.method, "ct or dt")->check(CLI::IsMember({"ct", "dt"}))->capture_default_str();
    t->add_option("--format", tune.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    t->add_option("--out", tune.out, "output file (default stdout)");

    CoeffsArgs coeffs;
    auto* c = app.add_subcommand("coeffs", "transfer-function coefficients");
    add_design_flags(c, coeffs.design);
    c->add_option("--variant", coeffs.variant, "single or dual")->required()->check(CLI::IsMember({"single", "dual"}));
    c->add_option("--flavor", coeffs.flavor, "output or error")->check(CLI::IsMember({"output", "error"}));
    c->add_flag("--via-oracle", coeffs.via_oracle, "derive from the state-space matrices (any order)");
    c->add_flag("--check", coeffs.check, "also report the oracle values and the deviation");
    c->add_option("--format", coeffs.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    c->add_option("--out", coeffs.out, "output file (default stdout)");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "run a scenario and write the trace CSV");
    s->add_option("scenario", sim.scenario, "scenario JSON file")->required();
    s->add_option("--variant", sim.variant, "ss, single or dual")->check(CLI::IsMember({"ss", "single", "dual"}));
    s->add_option("--flavor", sim.flavor, "output or error")->check(CLI::IsMember({"output", "error"}));
    s->add_option("--gains", sim.gains, "ct (quasi-continuous) or dt")->check(CLI::IsMember({"ct", "dt"}));
    s->add_option("--coeffs", sim.coeffs, "coefficient file from `coeffs`");
    s->add_option("--out", sim.out, "trace CSV (default stdout)");

    CompareArgs cmp;
    auto* m = app.add_subcommand("compare", "lockstep comparison of controller variants");
    m->add_option("scenario", cmp.scenario, "scenario JSON file")->required();
    m->add_option("--controller", cmp.controllers, "structure/flavor, e.g. ss/output (repeat)")->required();
    m->add_option("--window", cmp.windows, "t0:t1 in seconds (repeat; default: between events)");
    m->add_option("--format", cmp.format)->check(CLI::IsMember({"text", "json"}))->capture_default_str();
    m->add_option("--out", cmp.out, "report file (default stdout)");

    SweepArgs sw;
    auto* w = app.add_subcommand("sweep", "CT/DT gain ratio curves over x = omega_cl*T");
    w->add_option("--order", sw.order)->capture_default_str();
    w->add_option("--xmin", sw.xmin)->capture_default_str();
    w->add_option("--xmax", sw.xmax)->capture_default_str();
    w->add_option("--points", sw.points)->capture_default_str();
    w->add_flag("--log", sw.log, "logarithmic spacing");
    w->add_option("--out", sw.out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*t) return cmd_tune(tune, out, err);
        if (*c) return cmd_coeffs(coeffs, out, err);
        if (*s) return cmd_simulate(sim, out, err);
        if (*m) return cmd_compare(cmp, out, err);
        if (*w) return cmd_sweep(sw, out, err);
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace adrc::cli

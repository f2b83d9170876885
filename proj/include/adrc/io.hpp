#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "adrc/discretize.hpp"
#include "adrc/sim.hpp"

namespace adrc {

/// Shortest-safe text form of a double: 17 significant digits, lossless.
std::string format_number(double v);

struct CoefficientFile {
    AdrcDesign design;
    TfCoefficients coefficients;
};

struct CoefficientCheck {
    TfCoefficients oracle;
    double max_relative_deviation = 0.0;
};

/**
 * {"design":{n,b0,omega_cl,k_eso,T}, "variant", "alpha", "beta", "gamma",
 *  "k1_over_b0" (dual only), and with a check: "oracle":{...}, "max_relative_deviation"}
 */
std::string coefficients_to_json(const AdrcDesign& design, const TfCoefficients& c,
                                 const std::optional<CoefficientCheck>& check = std::nullopt);
/// name,value rows: design fields, variant, alpha1.., beta0.., gamma0.., k1_over_b0.
std::string coefficients_to_csv(const AdrcDesign& design, const TfCoefficients& c,
                                const std::optional<CoefficientCheck>& check = std::nullopt);

CoefficientFile coefficients_from_json(const std::string& text);
CoefficientFile coefficients_from_csv(const std::string& text);
/// Picks the parser from the first non-blank character.
CoefficientFile coefficients_from_text(const std::string& text);

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
Scenario load_scenario(const std::string& path);

/// Header t,r,r_filtered,y_clean,y_measured,u,u_lim,lim_mag,lim_rate; flags as 0/1.
void write_trace_csv(std::ostream& os, const Trace& trace);
std::string trace_to_csv(const Trace& trace);

}  // namespace adrc

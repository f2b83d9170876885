#include "adrc/tuning.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "adrc/discretize.hpp"
#include "adrc/polynomial.hpp"

namespace adrc {

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void require_order(int n) {
    if (n < 1) throw DomainError(fmt::format("plant order must be >= 1 (got {})", n));
}

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) throw DomainError(fmt::format("{} must be > 0 (got {})", name, value));
}

void require_sample_time(double T) { require_positive(T, "sampling interval T"); }

}  // namespace

void AdrcDesign::validate() const {
    require_order(order);
    if (b0 == 0.0 || !std::isfinite(b0)) throw DomainError("b0 must be finite and nonzero");
    require_positive(omega_cl, "omega_cl");
    require_positive(k_eso, "k_eso");
    require_sample_time(T);
}

bool AdrcDesign::observer_aliasing() const { return k_eso * omega_cl * T >= std::numbers::pi; }

std::vector<std::string> AdrcDesign::warnings() const {
    std::vector<std::string> out;
    if (coarse_sampling())
        out.push_back(fmt::format("omega_cl*T = {:.4g} > 0.1: quasi-continuous tuning is inaccurate here",
                                  omega_cl * T));
    if (observer_aliasing())
        out.push_back(fmt::format("k_eso*omega_cl*T = {:.4g} >= pi: observer pole beyond aliasing limit",
                                  k_eso * omega_cl * T));
    return out;
}

const char* to_string(GainMethod m) { return m == GainMethod::ContinuousTime ? "ct" : "dt"; }

GainMethod gain_method_from_string(const std::string& s) {
    if (s == "ct") return GainMethod::ContinuousTime;
    if (s == "dt") return GainMethod::DiscreteTime;
    throw DomainError(fmt::format("unknown gain method '{}' (expected ct or dt)", s));
}

Vector ct_controller_gains(const AdrcDesign& design) {
    require_order(design.order);
    require_positive(design.omega_cl, "omega_cl");
    const int n = design.order;
    Vector k(n);
    for (int i = 1; i <= n; ++i) k(i - 1) = binomial(n, i - 1) * std::pow(design.omega_cl, n - i + 1);
    return k;
}

Vector ct_observer_gains(const AdrcDesign& design) {
    require_order(design.order);
    require_positive(design.omega_cl, "omega_cl");
    require_positive(design.k_eso, "k_eso");
    const int n = design.order;
    const double w = design.k_eso * design.omega_cl;
    Vector l(n + 1);
    for (int i = 1; i <= n + 1; ++i) l(i - 1) = binomial(n + 1, i) * std::pow(w, i);
    return l;
}

PoleLocations dt_pole_locations(const AdrcDesign& design) {
    require_sample_time(design.T);
    return {std::exp(-design.omega_cl * design.T), std::exp(-design.k_eso * design.omega_cl * design.T)};
}

Vector dt_controller_gains_from_pole(int n, double z, double T) {
    require_order(n);
    require_sample_time(T);
    if (n == 1) {
        Vector k(1);
        k << (1.0 - z) / T;
        return k;
    }
    if (n == 2) {
        Vector k(2);
        k << (1.0 - z) * (1.0 - z) / (T * T), (4.0 - (1.0 + z) * (1.0 + z)) / (2.0 * T);
        return k;
    }
    // The ZOH integrator chain is similar to its T = 1 version via D = diag(T^-i),
    // so place on the well-scaled T = 1 plant and rescale: k_i = k1_i / T^(n+1-i).
    const PlantTriple unit = zoh_virtual_plant(n, 1.0);
    Vector k = place_poles(unit.A, unit.b, z);
    for (int i = 1; i <= n; ++i) k(i - 1) /= std::pow(T, n + 1 - i);

    const PlantTriple vp = zoh_virtual_plant(n, T);
    const double residual = placement_residual(vp.A - vp.b * k.transpose(), z);
    if (residual > kPlacementTolerance)
        throw ConditioningError(fmt::format("controller placement residual {:.3g} exceeds tolerance", residual),
                                residual);
    return k;
}

Vector dt_observer_gains_from_pole(int n, double z, double T) {
    require_order(n);
    require_sample_time(T);
    if (n == 1) {
        Vector l(2);
        l << 1.0 - z * z, (1.0 - z) * (1.0 - z) / T;
        return l;
    }
    if (n == 2) {
        Vector l(3);
        l << 1.0 - z * z * z, 3.0 / (2.0 * T) * (1.0 - z) * (1.0 - z) * (1.0 + z),
            (1.0 - z) * (1.0 - z) * (1.0 - z) / (T * T);
        return l;
    }
    // Same similarity argument as for the controller: l_i = l1_i / T^(i-1).
    const PlantTriple unit = zoh_integrator_chain(n, 1.0, 1.0);
    Vector l = place_current_observer_poles(unit.A, unit.c, z);
    for (int i = 1; i <= n + 1; ++i) l(i - 1) /= std::pow(T, i - 1);

    const PlantTriple ext = zoh_integrator_chain(n, 1.0, T);
    const Matrix A_eso = ext.A - l * (ext.c * ext.A);
    const double residual = placement_residual(A_eso, z);
    if (residual > kPlacementTolerance)
        throw ConditioningError(fmt::format("observer placement residual {:.3g} exceeds tolerance", residual),
                                residual);
    return l;
}

Vector dt_controller_gains(const AdrcDesign& design) {
    require_positive(design.omega_cl, "omega_cl");
    return dt_controller_gains_from_pole(design.order, dt_pole_locations(design).z_cl, design.T);
}

Vector dt_observer_gains(const AdrcDesign& design) {
    require_positive(design.omega_cl, "omega_cl");
    require_positive(design.k_eso, "k_eso");
    return dt_observer_gains_from_pole(design.order, dt_pole_locations(design).z_eso, design.T);
}

Vector ct_dt_gain_ratio(int order, double x) {
    if (!(x > 0.0)) throw DomainError(fmt::format("omega_cl*T must be > 0 (got {})", x));
    // 1 - exp(-x) via expm1 keeps the ratio accurate as x -> 0.
    const double one_minus_z = -std::expm1(-x);
    if (order == 1) {
        Vector r(1);
        r << x / one_minus_z;
        return r;
    }
    if (order == 2) {
        const double z = std::exp(-x);
        Vector r(2);
        // 4 - (1+z)^2 = (1-z)(3+z)
        r << (x * x) / (one_minus_z * one_minus_z), 4.0 * x / (one_minus_z * (3.0 + z));
        return r;
    }
    throw DomainError(fmt::format("gain ratio is defined for order 1 or 2 (got {})", order));
}

GainSet design_gains(const AdrcDesign& design, GainMethod method) {
    design.validate();
    if (method == GainMethod::ContinuousTime)
        return {method, ct_controller_gains(design), ct_observer_gains(design)};
    return {method, dt_controller_gains(design), dt_observer_gains(design)};
}

GainSet sampled_gains(const AdrcDesign& design, GainMethod controller_method) {
    design.validate();
    Vector k = controller_method == GainMethod::ContinuousTime ? ct_controller_gains(design)
                                                               : dt_controller_gains(design);
    return {controller_method, std::move(k), dt_observer_gains(design)};
}

}  // namespace adrc

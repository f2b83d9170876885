#pragma once

#include "adrc/design.hpp"

namespace adrc {

/**
 * Bandwidth-parameterized gains.
 *
 * Continuous-time gains place all poles of the virtual plant loop at
 * -omega_cl (controller) and all observer poles at -k_eso*omega_cl.
 * Discrete-time gains place the poles of the ZOH-discretized loop at
 * z_cl = exp(-omega_cl*T) and z_eso = exp(-k_eso*omega_cl*T). Closed forms are
 * used for n = 1 and n = 2; higher orders go through numeric pole placement.
 */

Vector ct_controller_gains(const AdrcDesign& design);
Vector ct_observer_gains(const AdrcDesign& design);

PoleLocations dt_pole_locations(const AdrcDesign& design);

Vector dt_controller_gains(const AdrcDesign& design);
Vector dt_observer_gains(const AdrcDesign& design);

// Same as above but parameterized directly by the pole location. Limiting
// cases (z = 1, i.e. zero bandwidth) are accepted here.
Vector dt_controller_gains_from_pole(int order, double z_cl, double T);
Vector dt_observer_gains_from_pole(int order, double z_eso, double T);

/// Ratios k_CT / k_DT as a function of x = omega_cl * T (one entry per gain).
Vector ct_dt_gain_ratio(int order, double x);

/// Pure continuous-time design (CT k and CT l) or full discrete-time design.
GainSet design_gains(const AdrcDesign& design, GainMethod method);

/**
 * Gains for a sampled ADRC. The controller gains follow `controller_method`;
 * the observer is always the discretized current observer, so l is always the
 * discrete-time set. ContinuousTime here is the quasi-continuous practice.
 */
GainSet sampled_gains(const AdrcDesign& design, GainMethod controller_method);

}  // namespace adrc

#pragma once

#include <string>

#include "adrc/design.hpp"

namespace adrc {

using RowVector = Eigen::RowVectorXd;

enum class PlantKind { ContinuousExtended, ContinuousVirtual, DiscreteZOH };

/// (A, b, c) triple of a single-input single-output linear model.
struct PlantTriple {
    Matrix A;
    Vector b;
    RowVector c;
    PlantKind kind = PlantKind::DiscreteZOH;
};

/// Integrator chain of order n with an extra constant-disturbance state (n+1 states).
PlantTriple continuous_extended(int n, double b0);
/// Unity-gain integrator chain of order n seen by the state feedback.
PlantTriple continuous_virtual(int n);

/**
 * ZOH discretization by the truncated exponential series
 *   A_d = sum_{i=0}^{terms} A^i T^i / i!,  b_d = sum_{i=1}^{terms} A^(i-1) T^i / i! * b.
 * Exact for nilpotent A once terms >= dim(A).
 */
PlantTriple zoh_series(const PlantTriple& continuous, double T, int terms);

PlantTriple zoh_integrator_chain(int n, double b0, double T);
PlantTriple zoh_virtual_plant(int n, double T);

/// Discretized current-observer matrices of the extended state observer.
struct EsoMatrices {
    Matrix A_d;
    Vector b_d;
    RowVector c_d;
    Matrix A_eso;  // A_d - l c_d A_d
    Vector b_eso;  // b_d - l c_d b_d
    double placement_residual = 0.0;  // vs. (z - z_eso)^(n+1)
};

enum class PlacementCheck { Report, Enforce };

EsoMatrices build_eso(const AdrcDesign& design, const Vector& l,
                      PlacementCheck check = PlacementCheck::Report);

/// State feedback k with eig(A - b k^T) = {z0, ..., z0} (Ackermann).
Vector place_poles(const Matrix& A, const Vector& b, double z0);
/// Current-observer gain l with eig(A - l c A) = {z0, ..., z0}.
Vector place_current_observer_poles(const Matrix& A, const RowVector& c, double z0);

enum class TfVariant { SingleTf, DualFeedback };

const char* to_string(TfVariant v);
TfVariant tf_variant_from_string(const std::string& s);

/**
 * Transfer-function coefficients.
 *
 * SingleTf:
 *   C_FB = sum beta_i z^-i / (1 + sum_{i=1}^{n} alpha_i z^-i) * 1/(1 - z^-1)
 *   C_PF = sum_{i=0}^{n+1} gamma_i z^-i / sum_{i=0}^{n} beta_i z^-i
 * DualFeedback:
 *   C_FBy = sum_{i=0}^{n} beta_i z^-i / (1 + sum_{i=1}^{n+1} alpha_i z^-i)
 *   C_FBu = z^-1 sum_{i=0}^{n} gamma_i z^-i / (same denominator)
 *   plus the reference feedforward gain k1/b0.
 */
struct TfCoefficients {
    TfVariant variant = TfVariant::DualFeedback;
    Vector alpha;
    Vector beta;
    Vector gamma;
    double k1_over_b0 = 0.0;  // DualFeedback only

    int order() const { return static_cast<int>(beta.size()) - 1; }
};

/// Closed-form coefficient tables (n = 1, 2 only; throws UnsupportedOrderError otherwise).
TfCoefficients tf_coefficients_closed_form(const AdrcDesign& design, TfVariant variant);

/**
 * Coefficients re-derived from the state-space matrices with the
 * Leverrier-Faddeev resolvent expansion. Works for any order and any gains.
 * For SingleTf, throws DomainError if the feedback denominator lacks the
 * root at z = 1 (|p(1)| > 1e-8), which indicates inconsistent gains.
 */
TfCoefficients tf_coefficients_oracle(const AdrcDesign& design, const Vector& k, const Vector& l,
                                      TfVariant variant);

/// Denominator of C_FB before the z = 1 root is factored out (ascending z^-1, monic).
Vector feedback_denominator_unfactored(const AdrcDesign& design, const Vector& k, const Vector& l);

/// Closed form for n <= 2, oracle otherwise, always with discrete-time gains.
TfCoefficients tf_coefficients(const AdrcDesign& design, TfVariant variant);

/**
 * Worst-case coefficient mismatch: max |a - b| / max(|b|, floor), with
 * floor = abs_tol / rel_tol so that tiny coefficients are judged absolutely.
 * Throws ShapeError on variant or length mismatch.
 */
double max_relative_deviation(const TfCoefficients& a, const TfCoefficients& b, double rel_tol = 1e-9,
                              double abs_tol = 1e-12);

}  // namespace adrc

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace adrc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error hierarchy. Everything derives from std::runtime_error so callers that
// only care about "something went wrong" can catch one type.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters (n < 1, omega <= 0, T <= 0, b0 == 0, ...).
class DomainError : public Error {
   public:
    using Error::Error;
};

/// Numeric pole placement missed its target by more than the placement tolerance.
class ConditioningError : public Error {
   public:
    ConditioningError(const std::string& what, double residual) : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

   private:
    double residual_;
};

/// Closed-form coefficient tables only exist for n = 1 and n = 2.
class UnsupportedOrderError : public Error {
   public:
    using Error::Error;
};

/// Violation of the step/commit protocol of a controller.
class UsageError : public Error {
   public:
    using Error::Error;
};

/// Mismatched dimensions, lengths or sampling intervals.
class ShapeError : public Error {
   public:
    using Error::Error;
};

/// Placement tolerance on pole locations (absolute).
inline constexpr double kPlacementTolerance = 1e-9;

/// Tuning parameter bundle of a bandwidth-parameterized ADRC.
struct AdrcDesign {
    int order = 1;          // plant order n
    double b0 = 1.0;        // plant gain estimate
    double omega_cl = 1.0;  // closed-loop bandwidth [rad/s]
    double k_eso = 10.0;    // observer bandwidth relative to omega_cl
    double T = 1e-3;        // sampling interval [s]

    /// Throws DomainError unless the design describes a usable controller.
    void validate() const;

    /// omega_cl * T above 0.1: quasi-continuous gains are noticeably off.
    bool coarse_sampling() const { return omega_cl * T > 0.1; }
    /// k_eso * omega_cl * T >= pi: observer pole beyond the aliasing limit.
    bool observer_aliasing() const;
    std::vector<std::string> warnings() const;

    bool operator==(const AdrcDesign&) const = default;
};

struct PoleLocations {
    double z_cl = 1.0;
    double z_eso = 1.0;
};

enum class GainMethod { ContinuousTime, DiscreteTime };

const char* to_string(GainMethod m);
GainMethod gain_method_from_string(const std::string& s);

struct GainSet {
    GainMethod method = GainMethod::DiscreteTime;
    Vector k;  // n controller gains
    Vector l;  // n+1 observer gains
};

}  // namespace adrc

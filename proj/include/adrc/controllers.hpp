#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adrc/design.hpp"
#include "adrc/discretize.hpp"
#include "adrc/limiter.hpp"

namespace adrc {

enum class Structure { StateSpace, SingleTf, DualFeedback };
enum class Signal { OutputBased, ErrorBased };

struct ControllerVariant {
    Structure structure = Structure::StateSpace;
    Signal signal = Signal::OutputBased;

    bool operator==(const ControllerVariant&) const = default;
};

// CLI spellings: ss|single|dual and output|error.
const char* to_string(Structure s);
const char* to_string(Signal s);
Structure structure_from_string(const std::string& s);
Signal signal_from_string(const std::string& s);
std::string to_string(const ControllerVariant& v);  // e.g. "dual/error"

/// All six structure/signal combinations.
std::vector<ControllerVariant> all_variants();

/**
 * Fixed-step controller with a two-phase protocol per sample:
 *   u = update(r, y);   // or step_error(e) for error-based controllers
 *   commit(u_lim);      // limited value actually sent to the plant
 * Stepping twice without a commit, or committing twice, throws UsageError.
 */
class Controller {
   public:
    virtual ~Controller() = default;

    /// Error-based controllers form e = r - y internally.
    double update(double r, double y);
    /// Error-based controllers only.
    double step_error(double e);
    void commit(double u_lim);

    /**
     * Initialize the states from the first sample instead of from rest. Must be
     * called before the first update.
     */
    void warm_start(double r, double y);
    void reset();

    ControllerVariant variant() const { return variant_; }
    const AdrcDesign& design() const { return design_; }
    bool awaiting_commit() const { return pending_; }
    double last_u_lim() const { return u_lim_prev_; }

    /// Internal state in a fixed layout (observer states or delay lines).
    virtual Vector state() const = 0;

    /// JSON snapshot carrying variant, design, coefficients and state.
    std::string snapshot() const;

   protected:
    Controller(const AdrcDesign& design, ControllerVariant variant);

    virtual double compute(double r, double x) = 0;  // x = y or e
    virtual void advance(double u_lim) = 0;
    virtual void initialize(double r, double x) = 0;
    virtual void clear() = 0;

    struct SnapshotParts;
    virtual void save(SnapshotParts& parts) const = 0;
    virtual void load(const SnapshotParts& parts) = 0;

    double u_lim_prev_ = 0.0;

   private:
    friend std::unique_ptr<Controller> restore_controller(const std::string& json);

    AdrcDesign design_;
    ControllerVariant variant_;
    bool pending_ = false;
    bool started_ = false;
};

/// Extended state observer plus state feedback, run directly in state space.
class StateSpaceController final : public Controller {
   public:
    StateSpaceController(const AdrcDesign& design, const GainSet& gains, Signal signal);

    Vector state() const override { return xhat_; }
    const Vector& k() const { return k_; }
    const Vector& l() const { return l_; }
    const EsoMatrices& eso() const { return eso_; }

   private:
    double compute(double r, double x) override;
    void advance(double u_lim) override;
    void initialize(double r, double x) override;
    void clear() override;
    void save(SnapshotParts& parts) const override;
    void load(const SnapshotParts& parts) override;

    Vector k_;
    Vector l_;
    EsoMatrices eso_;
    Vector h_;  // [k^T 1]
    Vector xhat_;
};

/**
 * Direct-form-I rational filter y = num(z^-1)/den(z^-1) x with den[0] != 0.
 */
class TfFilter {
   public:
    TfFilter() = default;
    TfFilter(Vector num, Vector den);

    double step(double x);
    /// Fill the delay lines as if x_in had been applied forever with output y_out.
    void set_history(double x_in, double y_out);
    void clear();

    const Vector& num() const { return num_; }
    const Vector& den() const { return den_; }
    const Vector& inputs() const { return x_hist_; }
    const Vector& outputs() const { return y_hist_; }
    void set_state(const Vector& inputs, const Vector& outputs);

   private:
    Vector num_, den_;
    Vector x_hist_;  // x(k-1), x(k-2), ...
    Vector y_hist_;  // y(k-1), y(k-2), ...
};

/**
 * Feedback filter with a clamped accumulator, plus a reference prefilter for
 * the output-based flavor. There is no u_lim path: the accumulator clamp is the
 * only windup measure.
 */
class SingleTfController final : public Controller {
   public:
    SingleTfController(const AdrcDesign& design, const TfCoefficients& coeffs, Signal signal,
                       double clamp_min = -INFINITY, double clamp_max = INFINITY);

    /// [prefilter x, prefilter y, feedback x, feedback y, accumulator]
    Vector state() const override;
    double accumulator() const { return acc_; }
    const TfCoefficients& coefficients() const { return coeffs_; }
    /// Prefilter output of the last update (equals r for error-based).
    double last_prefiltered() const { return r_pf_; }

   private:
    double compute(double r, double x) override;
    void advance(double u_lim) override;
    void initialize(double r, double x) override;
    void clear() override;
    void save(SnapshotParts& parts) const override;
    void load(const SnapshotParts& parts) override;

    TfCoefficients coeffs_;
    TfFilter prefilter_;
    TfFilter feedback_;
    double clamp_min_, clamp_max_;
    double acc_ = 0.0;
    double r_pf_ = 0.0;
};

/**
 * Two transfer functions from the measurement and from u_lim sharing one
 * denominator, realized in transposed direct form II with n+1 states.
 */
class DualFeedbackController final : public Controller {
   public:
    DualFeedbackController(const AdrcDesign& design, const TfCoefficients& coeffs, Signal signal);

    Vector state() const override { return w_; }
    const TfCoefficients& coefficients() const { return coeffs_; }

   private:
    double compute(double r, double x) override;
    void advance(double u_lim) override;
    void initialize(double r, double x) override;
    void clear() override;
    void save(SnapshotParts& parts) const override;
    void load(const SnapshotParts& parts) override;

    TfCoefficients coeffs_;
    Vector w_;
    double sign_;  // -1 for the measured output, +1 for the error
    double x_ = 0.0;
    double v_ = 0.0;
};

struct ControllerSpec {
    AdrcDesign design;
    ControllerVariant variant;
    GainMethod gains = GainMethod::DiscreteTime;  // ContinuousTime = quasi-continuous k
    bool warm_start = false;
    bool feed_unlimited = false;  // ablation: commit u instead of u_lim
    std::optional<TfCoefficients> coefficients;  // overrides the computed set
};

/**
 * Build a controller. TF coefficients come from the closed forms for DT gains
 * and n <= 2, otherwise from the state-space oracle. A SingleTf accumulator
 * is clamped to the limiter's magnitude bounds when one is given.
 */
std::unique_ptr<Controller> make_controller(const ControllerSpec& spec,
                                            const std::optional<LimiterSpec>& limiter = std::nullopt);

/// Coefficients a TF controller built from `spec` would use.
TfCoefficients controller_coefficients(const ControllerSpec& spec);

/// Rebuild a controller from snapshot(); continues bit-exactly.
std::unique_ptr<Controller> restore_controller(const std::string& json);

}  // namespace adrc

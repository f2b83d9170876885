#pragma once

namespace adrc {

/// Magnitude and slew limits on the control signal.
struct LimiterSpec {
    double u_min = 0.0;
    double u_max = 0.0;
    double rate_max = 0.0;  // per second, applied as +-rate_max*T per sample
    bool magnitude_enabled = true;
    bool rate_enabled = false;

    /// Throws DomainError for u_min >= u_max (magnitude on) or rate_max < 0 (rate on).
    void validate() const;

    bool operator==(const LimiterSpec&) const = default;
};

struct LimiterOutput {
    double u_lim = 0.0;
    bool magnitude_active = false;
    bool rate_active = false;
};

/**
 * Rate clamp around the previous limited value first, then the magnitude
 * clamp, so the magnitude bound always holds.
 */
LimiterOutput apply_limiter(const LimiterSpec& spec, double u, double u_lim_prev, double T);

}  // namespace adrc

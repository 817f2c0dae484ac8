#ifndef QDCAVITY_NEUTRAL_QD_HPP
#define QDCAVITY_NEUTRAL_QD_HPP

#include "qdcavity/core.hpp"
#include "qdcavity/polarization.hpp"

#include <optional>
#include <span>
#include <vector>

namespace qdcavity
{

enum class Channel
{
    transmission,
    reflection
};

// V-type neutral QD: two orthogonal linear dipoles sharing one cavity.
// qd_x is the low-frequency transition and couples to theta = 0 deg.
struct NeutralQdSystem
{
    CavityParams cavity;
    QdTransition qd_x;
    QdTransition qd_y;
    // Residual polarization splitting of the cavity, applied to the y axis.
    double cavity_offset_y = 0.0;

    // omega_y - omega_x in GHz.
    double fss_ghz() const;

    void validate() const;

    // Doublet centred at `center_omega`, split by `fss_ghz`, both lines with
    // the same cooperativity and dephasing.
    static NeutralQdSystem symmetric(const CavityParams &cavity, double center_omega, double fss_ghz,
                                     double gamma_perp, double cooperativity);
};

JonesMatrix jones_transmission(const NeutralQdSystem &sys, double laser_omega);
JonesMatrix jones_reflection(const NeutralQdSystem &sys, double laser_omega);

// |<out| M |in>|^2, or ||M |in>||^2 when no analyzer is given. Mode matching
// enters per axis: T = eta_in eta_T |.|^2 and R = eta_R |1 - eta_in t|^2.
double polarized_intensity(const NeutralQdSystem &sys, double laser_omega, const JonesVector &in,
                           const std::optional<JonesVector> &out, Channel channel);

SpectralScan polarized_spectrum(const NeutralQdSystem &sys, const FrequencyGrid &grid, double theta_in_deg,
                                std::optional<double> theta_out_deg, Channel channel);

// Analyzer at theta_out = theta_in + 90 + delta for each delta.
std::vector<SpectralScan> delta_theta_series(const NeutralQdSystem &sys, const FrequencyGrid &grid,
                                             double theta_in_deg, std::span<const double> delta_thetas_deg,
                                             Channel channel = Channel::transmission);

// Caller-supplied affine Stark map, omega_qd(V) = omega_at_zero + slope * V.
// Plotting helper only.
struct StarkMap
{
    double omega_at_zero = 0.0;
    double slope = 0.0; // rad/ns per volt

    double operator()(double volts) const { return omega_at_zero + slope * volts; }
};

} // namespace qdcavity

#endif

#include "qdcavity/neutral_qd.hpp"

#include "qdcavity/units.hpp"

#include <string>

namespace qdcavity
{

double NeutralQdSystem::fss_ghz() const
{
    return units::rad_per_ns_to_ghz(qd_y.omega_qd - qd_x.omega_qd);
}

void NeutralQdSystem::validate() const
{
    cavity.validate();
    qd_x.validate();
    qd_y.validate();
    detail::require_finite(cavity_offset_y, "cavity_offset_y");
}

NeutralQdSystem NeutralQdSystem::symmetric(const CavityParams &cavity, double center_omega, double fss_ghz,
                                           double gamma_perp, double cooperativity)
{
    const double half = 0.5 * units::ghz_to_rad_per_ns(fss_ghz);
    NeutralQdSystem sys;
    sys.cavity = cavity;
    sys.qd_x = QdTransition::from_cooperativity(center_omega - half, gamma_perp, cooperativity, cavity);
    sys.qd_y = QdTransition::from_cooperativity(center_omega + half, gamma_perp, cooperativity, cavity);
    return sys;
}

namespace
{
CavityParams y_cavity(const NeutralQdSystem &sys)
{
    CavityParams cav = sys.cavity;
    cav.omega_c += sys.cavity_offset_y;
    return cav;
}
} // namespace

JonesMatrix jones_transmission(const NeutralQdSystem &sys, double laser_omega)
{
    return JonesMatrix::diagonal(transmission_amplitude(laser_omega, sys.cavity, sys.qd_x),
                                 transmission_amplitude(laser_omega, y_cavity(sys), sys.qd_y), Basis::linear_xy);
}

JonesMatrix jones_reflection(const NeutralQdSystem &sys, double laser_omega)
{
    return JonesMatrix::diagonal(reflection_amplitude(laser_omega, sys.cavity, sys.qd_x),
                                 reflection_amplitude(laser_omega, y_cavity(sys), sys.qd_y), Basis::linear_xy);
}

double polarized_intensity(const NeutralQdSystem &sys, double laser_omega, const JonesVector &in,
                           const std::optional<JonesVector> &out, Channel channel)
{
    // Non-perfect mode matching: T = eta_in eta_T |.|^2, R = eta_R |1 - eta_in t|^2 per axis.
    const CavityParams &cav = sys.cavity;
    const JonesMatrix t = jones_transmission(sys, laser_omega);
    double efficiency = cav.eta_in * cav.eta_T;
    JonesMatrix m = t;
    if (channel == Channel::reflection)
    {
        efficiency = cav.eta_R;
        m = cav.eta_in == 1.0 ? jones_reflection(sys, laser_omega)
                              : JonesMatrix::diagonal(1.0 - cav.eta_in * t(0, 0), 1.0 - cav.eta_in * t(1, 1),
                                                      Basis::linear_xy);
    }
    if (out)
    {
        return efficiency * std::norm(projected_amplitude(*out, m, in));
    }
    return efficiency * m.apply(in).components().squaredNorm();
}

SpectralScan polarized_spectrum(const NeutralQdSystem &sys, const FrequencyGrid &grid, double theta_in_deg,
                                std::optional<double> theta_out_deg, Channel channel)
{
    sys.validate();
    const JonesVector in = linear_state(theta_in_deg);
    std::optional<JonesVector> out;
    if (theta_out_deg)
    {
        out = linear_state(*theta_out_deg);
    }

    SpectralScan scan;
    scan.kind = channel == Channel::transmission ? ScanKind::transmittivity : ScanKind::reflectivity;
    scan.grid = grid;
    scan.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        scan.values[i] = polarized_intensity(sys, grid.omega(i), in, out, channel);
    }
    return scan;
}

std::vector<SpectralScan> delta_theta_series(const NeutralQdSystem &sys, const FrequencyGrid &grid,
                                             double theta_in_deg, std::span<const double> delta_thetas_deg,
                                             Channel channel)
{
    std::vector<SpectralScan> scans;
    scans.reserve(delta_thetas_deg.size());
    for (double delta : delta_thetas_deg)
    {
        scans.push_back(polarized_spectrum(sys, grid, theta_in_deg, theta_in_deg + 90.0 + delta, channel));
    }
    return scans;
}

} // namespace qdcavity

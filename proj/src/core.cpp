#include "qdcavity/core.hpp"

#include "qdcavity/errors.hpp"
#include "qdcavity/units.hpp"

#include <cmath>

namespace qdcavity
{

namespace detail
{
void require_finite(double value, const char *name)
{
    if (!std::isfinite(value))
    {
        throw DomainError(std::string(name) + " must be finite");
    }
}
} // namespace detail

using detail::require_finite;

namespace
{
void require_efficiency(double value, const char *name)
{
    require_finite(value, name);
    if (value < 0.0 || value > 1.0)
    {
        throw DomainError(std::string(name) + " must lie in [0, 1]");
    }
}
} // namespace

void CavityParams::validate() const
{
    require_finite(omega_c, "omega_c");
    require_finite(kappa_m, "kappa_m");
    require_finite(kappa_s, "kappa_s");
    if (kappa_m <= 0.0)
    {
        throw DomainError("kappa_m must be positive");
    }
    if (kappa_s < 0.0)
    {
        throw DomainError("kappa_s must be non-negative");
    }
    require_efficiency(eta_in, "eta_in");
    require_efficiency(eta_R, "eta_R");
    require_efficiency(eta_T, "eta_T");
}

CavityParams CavityParams::from_kappa(double omega_c, double kappa, double eta_out)
{
    require_finite(kappa, "kappa");
    require_finite(eta_out, "eta_out");
    if (kappa <= 0.0 || eta_out <= 0.0 || eta_out > 1.0)
    {
        throw DomainError("need kappa > 0 and eta_out in (0, 1]");
    }
    CavityParams cav;
    cav.omega_c = omega_c;
    cav.kappa_m = 0.5 * eta_out * kappa;
    cav.kappa_s = kappa - 2.0 * cav.kappa_m;
    if (cav.kappa_s < 0.0)
    {
        cav.kappa_s = 0.0;
    }
    return cav;
}

void QdTransition::validate() const
{
    require_finite(omega_qd, "omega_qd");
    require_finite(gamma_perp, "gamma_perp");
    require_finite(g, "g");
    if (gamma_perp <= 0.0)
    {
        throw DomainError("gamma_perp must be positive");
    }
    if (g < 0.0)
    {
        throw DomainError("g must be non-negative");
    }
}

QdTransition QdTransition::from_cooperativity(double omega_qd, double gamma_perp, double cooperativity,
                                              const CavityParams &cav)
{
    require_finite(cooperativity, "cooperativity");
    if (cooperativity < 0.0)
    {
        throw DomainError("cooperativity must be non-negative");
    }
    QdTransition qd{omega_qd, gamma_perp, std::sqrt(cooperativity * cav.kappa() * gamma_perp)};
    qd.validate();
    return qd;
}

void MirrorSpec::validate() const
{
    require_finite(t_mirror, "t_mirror");
    require_finite(n_avg, "n_avg");
    require_finite(l_cav_um, "l_cav_um");
    if (!(t_mirror > 0.0 && t_mirror < 1.0))
    {
        throw DomainError("t_mirror must lie in (0, 1)");
    }
    if (n_avg < 1.0)
    {
        throw DomainError("n_avg must be >= 1");
    }
    if (l_cav_um <= 0.0)
    {
        throw DomainError("l_cav_um must be positive");
    }
}

std::string to_string(ScanKind kind)
{
    switch (kind)
    {
    case ScanKind::amplitude:
        return "amplitude";
    case ScanKind::reflectivity:
        return "reflectivity";
    case ScanKind::transmittivity:
        return "transmittivity";
    }
    return "unknown";
}

ScanKind scan_kind_from_string(const std::string &name)
{
    if (name == "amplitude")
        return ScanKind::amplitude;
    if (name == "reflectivity")
        return ScanKind::reflectivity;
    if (name == "transmittivity")
        return ScanKind::transmittivity;
    throw DomainError("unknown scan kind '" + name + "'");
}

FrequencyGrid FrequencyGrid::linspace_ghz(double reference, double start_ghz, double stop_ghz, std::size_t points)
{
    require_finite(reference, "reference");
    require_finite(start_ghz, "start_ghz");
    require_finite(stop_ghz, "stop_ghz");
    if (points < 2 || !(stop_ghz > start_ghz))
    {
        throw DomainError("grid needs at least 2 points and stop > start");
    }
    FrequencyGrid grid;
    grid.reference = reference;
    grid.offsets.resize(points);
    const double step = (stop_ghz - start_ghz) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i)
    {
        // Last point pinned to stop exactly.
        const double f = (i + 1 == points) ? stop_ghz : start_ghz + step * static_cast<double>(i);
        grid.offsets[i] = units::ghz_to_rad_per_ns(f);
    }
    return grid;
}

std::vector<double> SpectralScan::frequencies() const
{
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        out[i] = grid.omega(i);
    }
    return out;
}

std::vector<double> SpectralScan::intensities() const
{
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        out[i] = kind == ScanKind::amplitude ? std::norm(values[i]) : values[i].real();
    }
    return out;
}

void SpectralScan::validate() const
{
    if (grid.size() < 2 || values.size() != grid.size())
    {
        throw DomainError("scan needs >= 2 points and one value per frequency");
    }
    require_finite(grid.reference, "reference");
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        require_finite(grid.offsets[i], "frequency");
        if (i > 0 && !(grid.offsets[i] > grid.offsets[i - 1]))
        {
            throw DomainError("frequencies must be strictly increasing (index " + std::to_string(i) + ")");
        }
        require_finite(values[i].real(), "value");
        require_finite(values[i].imag(), "value");
        if (kind != ScanKind::amplitude && (values[i].imag() != 0.0 || values[i].real() < 0.0))
        {
            throw DomainError("intensity values must be real and non-negative (index " + std::to_string(i) + ")");
        }
    }
}

Complex transmission_amplitude(double laser_omega, const CavityParams &cav, const std::optional<QdTransition> &qd)
{
    require_finite(laser_omega, "laser_omega");
    cav.validate();
    const double kappa = cav.kappa();
    const double cavity_detuning = 2.0 * (laser_omega - cav.omega_c) / kappa;
    Complex denominator(1.0, -cavity_detuning);
    if (qd)
    {
        qd->validate();
        const double coop = qd->cooperativity(cav);
        if (coop != 0.0)
        {
            const double qd_detuning = (laser_omega - qd->omega_qd) / qd->gamma_perp;
            denominator += 2.0 * coop / Complex(1.0, -qd_detuning);
        }
    }
    return cav.eta_out() / denominator;
}

Complex reflection_amplitude(double laser_omega, const CavityParams &cav, const std::optional<QdTransition> &qd)
{
    return 1.0 - transmission_amplitude(laser_omega, cav, qd);
}

Intensities mode_matched_intensities(double laser_omega, const CavityParams &cav,
                                     const std::optional<QdTransition> &qd)
{
    const Complex t = transmission_amplitude(laser_omega, cav, qd);
    return {cav.eta_in * cav.eta_T * std::norm(t), cav.eta_R * std::norm(1.0 - cav.eta_in * t)};
}

LossBudget loss_budget(const MirrorSpec &mirror, double measured_q, double lambda_nm)
{
    mirror.validate();
    require_finite(measured_q, "measured_q");
    require_finite(lambda_nm, "lambda_nm");
    if (measured_q <= 0.0 || lambda_nm <= 0.0)
    {
        throw DomainError("measured_q and lambda_nm must be positive");
    }

    LossBudget budget;
    budget.round_trip_ns = 2.0 * mirror.n_avg * mirror.l_cav_um / units::kSpeedOfLight_um_per_ns;
    const double omega = units::wavelength_nm_to_omega(lambda_nm);
    const double kappa_m = mirror.t_mirror / budget.round_trip_ns;
    const double kappa = omega / measured_q;
    double kappa_s = kappa - 2.0 * kappa_m;
    // Rounding slack only; a genuinely negative remainder is an error.
    if (kappa_s < 0.0 && -kappa_s <= 1e-12 * kappa)
    {
        kappa_s = 0.0;
    }
    if (kappa_s < 0.0)
    {
        throw ConsistencyError("measured Q exceeds the mirror-limited Q (kappa_s = " + std::to_string(kappa_s) +
                               " 1/ns)");
    }

    budget.cavity.omega_c = omega;
    budget.cavity.kappa_m = kappa_m;
    budget.cavity.kappa_s = kappa_s;
    budget.q_ideal = omega / (2.0 * kappa_m);
    return budget;
}

double mean_photon_number(double laser_power_pw, Complex t, const CavityParams &cav, double lambda_nm)
{
    require_finite(laser_power_pw, "laser_power_pw");
    require_finite(lambda_nm, "lambda_nm");
    if (laser_power_pw < 0.0)
    {
        throw DomainError("laser power must be non-negative");
    }
    cav.validate();
    const double power_w = laser_power_pw * 1e-12;
    const double kappa_m_per_s = cav.kappa_m * 1e9;
    const double photon_energy_j = units::kHbar_J_s * units::wavelength_nm_to_omega(lambda_nm) * 1e9;
    return std::norm(t) * power_w / (kappa_m_per_s * photon_energy_j);
}

} // namespace qdcavity

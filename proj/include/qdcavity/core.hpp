#ifndef QDCAVITY_CORE_HPP
#define QDCAVITY_CORE_HPP

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qdcavity
{

using Complex = std::complex<double>;

// Single-mode cavity. All rates are intensity damping rates in 1/ns, omega_c
// is an absolute angular frequency in rad/ns.
struct CavityParams
{
    double omega_c = 0.0;
    double kappa_m = 0.0; // per mirror
    double kappa_s = 0.0; // scattering + absorption
    double eta_in = 1.0;
    double eta_R = 1.0;
    double eta_T = 1.0;

    double kappa() const { return 2.0 * kappa_m + kappa_s; }
    double eta_out() const { return 2.0 * kappa_m / kappa(); }
    double quality_factor() const { return omega_c / kappa(); }

    // Throws DomainError when an invariant is violated.
    void validate() const;

    // Builds a cavity from the total damping rate and the out-coupling
    // efficiency instead of the per-mirror rate.
    static CavityParams from_kappa(double omega_c, double kappa, double eta_out);
};

// One optical transition of the quantum dot.
struct QdTransition
{
    double omega_qd = 0.0;
    double gamma_perp = 1.0; // transverse dephasing rate, 1/ns
    double g = 0.0;          // QD-mode coupling strength, 1/ns

    double cooperativity(const CavityParams &cav) const { return g * g / (cav.kappa() * gamma_perp); }

    void validate() const;

    static QdTransition from_cooperativity(double omega_qd, double gamma_perp, double cooperativity,
                                           const CavityParams &cav);
};

struct MirrorSpec
{
    double t_mirror = 0.0; // single-mirror intensity transmittivity
    double n_avg = 1.0;
    double l_cav_um = 0.0; // effective cavity length

    void validate() const;
};

struct LossBudget
{
    CavityParams cavity;
    double round_trip_ns = 0.0;
    double q_ideal = 0.0; // Q the mirrors alone would allow
};

enum class ScanKind
{
    amplitude,
    reflectivity,
    transmittivity
};

std::string to_string(ScanKind kind);
ScanKind scan_kind_from_string(const std::string &name);

// Caller-supplied laser frequency grid. Points are stored as offsets from an
// absolute reference so that GHz-scale detunings keep full precision.
struct FrequencyGrid
{
    double reference = 0.0;      // rad/ns
    std::vector<double> offsets; // rad/ns, strictly increasing

    std::size_t size() const { return offsets.size(); }
    double omega(std::size_t i) const { return reference + offsets[i]; }

    // `points` evenly spaced detunings in [start_ghz, stop_ghz].
    static FrequencyGrid linspace_ghz(double reference, double start_ghz, double stop_ghz, std::size_t points);
};

struct SpectralScan
{
    ScanKind kind = ScanKind::reflectivity;
    FrequencyGrid grid;
    std::vector<Complex> values; // imaginary part is zero for intensity kinds
    std::map<std::string, std::string> metadata;

    std::size_t size() const { return grid.size(); }
    std::vector<double> frequencies() const;
    std::vector<double> intensities() const;

    // Equal lengths >= 2, strictly increasing grid, intensities real and
    // non-negative.
    void validate() const;
};

// Cavity transmission amplitude with an optional coupled two-level emitter:
//   t = eta_out / (1 - i*D + 2C / (1 - i*D')),
//   D = 2(w - w_c)/kappa,  D' = (w - w_qd)/gamma_perp.
// A transition with C == 0 takes the empty-cavity branch.
Complex transmission_amplitude(double laser_omega, const CavityParams &cav,
                               const std::optional<QdTransition> &qd = std::nullopt);

// r = 1 - t for perfect mode matching.
Complex reflection_amplitude(double laser_omega, const CavityParams &cav,
                             const std::optional<QdTransition> &qd = std::nullopt);

struct Intensities
{
    double transmittivity = 0.0;
    double reflectivity = 0.0;
};

// T = eta_in * eta_T * |t|^2 and R = eta_R * |1 - eta_in * t|^2.
Intensities mode_matched_intensities(double laser_omega, const CavityParams &cav,
                                     const std::optional<QdTransition> &qd = std::nullopt);

// Splits a measured Q into mirror and scattering losses. Throws
// ConsistencyError when the measured Q exceeds the mirror-limited one.
LossBudget loss_budget(const MirrorSpec &mirror, double measured_q, double lambda_nm);

// <n> = |t|^2 P / (kappa_m * hbar * omega).
double mean_photon_number(double laser_power_pw, Complex t, const CavityParams &cav, double lambda_nm);

namespace detail
{
void require_finite(double value, const char *name);
}

} // namespace qdcavity

#endif

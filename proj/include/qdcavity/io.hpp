#ifndef QDCAVITY_IO_HPP
#define QDCAVITY_IO_HPP

#include "qdcavity/charged_qd.hpp"
#include "qdcavity/core.hpp"
#include "qdcavity/fitting.hpp"
#include "qdcavity/modes.hpp"
#include "qdcavity/neutral_qd.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace qdcavity::io
{

// Scan files are CSV:
//
//   # kind=transmittivity
//   # reference_ghz=318930.1
//   # theta_in_deg=45
//   frequency_ghz,value
//   -20,0.00123
//   ...
//
// Frequencies are detunings from reference_ghz. Amplitude scans use the
// header `frequency_ghz,re,im`. Metadata lines are sorted by key.

SpectralScan parse_scan(const std::string &text);
SpectralScan read_scan(const std::filesystem::path &path);

std::string format_scan(const SpectralScan &scan);
void write_scan(const SpectralScan &scan, const std::filesystem::path &path);

// Fit report as JSON with lexicographically sorted keys.
std::string format_report(const FitResult &result, const std::optional<DerivedQuantities> &derived = std::nullopt);
void write_report(const FitResult &result, const std::filesystem::path &path,
                  const std::optional<DerivedQuantities> &derived = std::nullopt);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path &path, const std::string &contents);
std::string read_file(const std::filesystem::path &path);

// %.12g in the C locale; -0 is rendered as 0.
std::string format_number(double value);
double parse_number(const std::string &text);

// ---------------------------------------------------------------------------
// Configuration file. Every section is optional and defaults to the
// reference device (lambda ~ 940 nm micropillar, kappa_m = 11/ns,
// kappa_s = 55/ns). Unknown keys are rejected.

struct NeutralQdConfig
{
    double cooperativity = 2.5;
    double gamma_perp_ns_inv = 2.0;
    double center_detuning_ghz = 0.0; // doublet centre relative to the reference
    double fss_ghz = 3.0;
    double cavity_offset_y_ghz = 0.0;
    // Per-transition overrides.
    std::optional<double> cooperativity_x, cooperativity_y;
    std::optional<double> gamma_perp_x_ns_inv, gamma_perp_y_ns_inv;
};

struct ChargedQdConfig
{
    double cooperativity = 0.13;
    double gamma_perp_ns_inv = 9.5;
    double detuning_ghz = 0.0;
    double spin_up_population = 0.5;
};

struct ModesConfig
{
    double lambda_00_nm = 940.48;
    double n0 = 3.25;
    std::optional<double> l_cav_um; // default 5 lambda_00 / n0
    std::optional<double> delta_lambda_10_nm;
    std::optional<double> delta_lambda_01_nm;
    double na_x = 0.18; // used when the splittings are absent
    double na_y = 0.25;
    double quality_factor = 2.6e4;
    double objective_na = 0.4;
};

struct FitConfig
{
    FitOptions options;
    std::map<std::string, std::pair<double, double>> bounds;
    std::map<std::string, double> initial;
};

struct Config
{
    double lambda_nm = 940.0; // reference wavelength; grids are detunings from it
    double cavity_detuning_ghz = 0.0;
    double kappa_m_ns_inv = 11.0;
    double kappa_s_ns_inv = 55.0;
    double eta_in = 1.0;
    double eta_r = 1.0;
    double eta_t = 1.0;
    MirrorSpec mirror{3.4e-4, 3.25, 0.0}; // l_cav_um 0 means 5 lambda / n
    double measured_q = 2.6e4;

    NeutralQdConfig neutral;
    ChargedQdConfig charged;
    ModesConfig modes;
    FitConfig fit;

    double reference_omega() const;
    CavityParams cavity() const;
    MirrorSpec mirror_spec() const;
    NeutralQdSystem neutral_system() const;
    ChargedQdSystem charged_system() const;
    SpinState spin() const;
    ModeGeometry mode_geometry() const;

    // Fit coordinates matching the configured system.
    ModelParameters model_parameters(SystemModel system) const;
};

Config parse_config(const std::string &json_text);
Config read_config(const std::filesystem::path &path);

} // namespace qdcavity::io

#endif

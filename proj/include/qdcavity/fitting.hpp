#ifndef QDCAVITY_FITTING_HPP
#define QDCAVITY_FITTING_HPP

#include "qdcavity/charged_qd.hpp"
#include "qdcavity/core.hpp"
#include "qdcavity/neutral_qd.hpp"
#include "qdcavity/polarization.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace qdcavity
{

enum class SystemModel
{
    empty,
    neutral,
    charged_m1,
    charged_m2
};

std::string to_string(SystemModel model);
SystemModel system_model_from_string(const std::string &name);

// Everything the forward models need, in fit coordinates. Frequencies are GHz
// detunings from `reference` so that the optimizer sees O(1) numbers.
enum class ParameterId
{
    cooperativity,
    gamma_perp,
    kappa,
    eta_out,
    cavity_ghz,
    qd_ghz,  // neutral doublet centre or trion line
    fss_ghz, // neutral only
    scale
};

inline constexpr std::array<ParameterId, 8> kAllParameters = {
    ParameterId::cooperativity, ParameterId::gamma_perp, ParameterId::kappa,   ParameterId::eta_out,
    ParameterId::cavity_ghz,    ParameterId::qd_ghz,     ParameterId::fss_ghz, ParameterId::scale};

std::string parameter_name(ParameterId id);
std::string parameter_unit(ParameterId id);
ParameterId parameter_from_name(const std::string &name);

struct ModelParameters
{
    double reference = 0.0; // rad/ns, never fitted
    double cooperativity = 0.0;
    double gamma_perp = 1.0;
    double kappa = 1.0;
    double eta_out = 1.0;
    double cavity_ghz = 0.0;
    double qd_ghz = 0.0;
    double fss_ghz = 0.0;
    double scale = 1.0;
    // Mode-matching efficiencies, held fixed during fits.
    double eta_in = 1.0;
    double eta_R = 1.0;
    double eta_T = 1.0;

    double &operator[](ParameterId id);
    double operator[](ParameterId id) const;

    CavityParams cavity() const;
    NeutralQdSystem neutral_system() const;
    ChargedQdSystem charged_system() const;
};

// How one scan was taken.
struct ScanModel
{
    SystemModel system = SystemModel::neutral;
    Channel channel = Channel::transmission;
    JonesVector in = linear_state(0.0);
    std::optional<JonesVector> out;
    SpinState spin = SpinState::balanced();

    void validate() const;
};

// scale * (model intensity at laser_omega).
double model_intensity(const ModelParameters &params, const ScanModel &model, double laser_omega);

struct FitScan
{
    SpectralScan data;
    ScanModel model;
    std::vector<double> weights; // empty = unweighted
};

struct FreeParameter
{
    ParameterId id = ParameterId::cooperativity;
    double initial = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool shared = true; // false: one independent value per scan
};

struct FitProblem
{
    ModelParameters base;
    std::vector<FitScan> scans;
    std::vector<FreeParameter> free;

    void validate() const;

    // Optimizer coordinates: one per shared parameter, one per scan for
    // per-scan parameters ("scale[2]").
    std::size_t dimension() const;
    std::vector<std::string> coordinate_names() const;
    Eigen::VectorXd initial() const;
    Eigen::VectorXd lower() const;
    Eigen::VectorXd upper() const;
    std::size_t residual_count() const;

    ModelParameters parameters_for_scan(const Eigen::VectorXd &x, std::size_t scan) const;
};

// sqrt(w) * (model - data), scans concatenated in order.
Eigen::VectorXd residuals(const FitProblem &problem, const Eigen::VectorXd &x);

// Central differences, step = relative_step * max(|x_j|, 1e-2).
Eigen::MatrixXd finite_difference_jacobian(const FitProblem &problem, const Eigen::VectorXd &x,
                                           double relative_step = 1e-6);

struct FitOptions
{
    int max_iter = 200;
    double tolerance = 1e-10;
    double initial_damping = 1e-3;
};

enum class Convergence
{
    converged,
    max_iter,
    singular
};

std::string to_string(Convergence c);

struct Estimate
{
    std::string name;
    std::string unit;
    double value = 0.0;
    std::optional<double> uncertainty; // 1 sigma, absent when the covariance is unavailable
};

struct FitResult
{
    std::vector<Estimate> estimates;
    double residual_norm = 0.0; // ||r||_2
    Convergence convergence = Convergence::converged;
    int iterations = 0;
    std::vector<double> cost_history; // sum of squares after each accepted step
    ModelParameters parameters;       // base with shared estimates applied

    const Estimate *find(const std::string &name) const;
};

// Levenberg-Marquardt on intensity residuals. Deterministic for identical
// inputs.
FitResult fit(const FitProblem &problem, const FitOptions &options = {});

enum class CouplingRegime
{
    weak,
    intermediate,
    strong
};

std::string to_string(CouplingRegime regime);

// weak: 2g <= gamma_perp; intermediate: gamma_perp < 2g < kappa; strong otherwise.
CouplingRegime classify_coupling(double two_g, double kappa, double gamma_perp);

struct DerivedQuantities
{
    double cooperativity = 0.0;
    double gamma_perp = 0.0;
    double kappa = 0.0;
    double g = 0.0;
    double two_g = 0.0;
    CouplingRegime regime = CouplingRegime::weak;
    double quality_factor = 0.0;
    double dephasing_time_ps = 0.0;
};

// C, gamma_perp and kappa come from the fit; omega_c from `cav`.
DerivedQuantities derived_quantities(const FitResult &result, const CavityParams &cav);

} // namespace qdcavity

#endif

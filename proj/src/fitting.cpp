#include "qdcavity/fitting.hpp"

#include "qdcavity/errors.hpp"
#include "qdcavity/units.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qdcavity
{

std::string to_string(SystemModel model)
{
    switch (model)
    {
    case SystemModel::empty:
        return "empty";
    case SystemModel::neutral:
        return "neutral";
    case SystemModel::charged_m1:
        return "charged-m1";
    case SystemModel::charged_m2:
        return "charged-m2";
    }
    return "unknown";
}

SystemModel system_model_from_string(const std::string &name)
{
    for (auto m : {SystemModel::empty, SystemModel::neutral, SystemModel::charged_m1, SystemModel::charged_m2})
    {
        if (to_string(m) == name)
        {
            return m;
        }
    }
    throw DomainError("unknown system '" + name + "'");
}

std::string parameter_name(ParameterId id)
{
    switch (id)
    {
    case ParameterId::cooperativity:
        return "C";
    case ParameterId::gamma_perp:
        return "gamma_perp";
    case ParameterId::kappa:
        return "kappa";
    case ParameterId::eta_out:
        return "eta_out";
    case ParameterId::cavity_ghz:
        return "cavity_ghz";
    case ParameterId::qd_ghz:
        return "qd_ghz";
    case ParameterId::fss_ghz:
        return "fss_ghz";
    case ParameterId::scale:
        return "scale";
    }
    return "unknown";
}

std::string parameter_unit(ParameterId id)
{
    switch (id)
    {
    case ParameterId::gamma_perp:
    case ParameterId::kappa:
        return "1/ns";
    case ParameterId::cavity_ghz:
    case ParameterId::qd_ghz:
    case ParameterId::fss_ghz:
        return "GHz";
    default:
        return "1";
    }
}

ParameterId parameter_from_name(const std::string &name)
{
    for (ParameterId id : kAllParameters)
    {
        if (parameter_name(id) == name)
        {
            return id;
        }
    }
    throw DomainError("unknown fit parameter '" + name + "'");
}

double &ModelParameters::operator[](ParameterId id)
{
    switch (id)
    {
    case ParameterId::cooperativity:
        return cooperativity;
    case ParameterId::gamma_perp:
        return gamma_perp;
    case ParameterId::kappa:
        return kappa;
    case ParameterId::eta_out:
        return eta_out;
    case ParameterId::cavity_ghz:
        return cavity_ghz;
    case ParameterId::qd_ghz:
        return qd_ghz;
    case ParameterId::fss_ghz:
        return fss_ghz;
    case ParameterId::scale:
        break;
    }
    return scale;
}

double ModelParameters::operator[](ParameterId id) const
{
    return const_cast<ModelParameters &>(*this)[id];
}

CavityParams ModelParameters::cavity() const
{
    CavityParams cav = CavityParams::from_kappa(reference + units::ghz_to_rad_per_ns(cavity_ghz), kappa, eta_out);
    cav.eta_in = eta_in;
    cav.eta_R = eta_R;
    cav.eta_T = eta_T;
    return cav;
}

NeutralQdSystem ModelParameters::neutral_system() const
{
    return NeutralQdSystem::symmetric(cavity(), reference + units::ghz_to_rad_per_ns(qd_ghz), fss_ghz, gamma_perp,
                                      cooperativity);
}

ChargedQdSystem ModelParameters::charged_system() const
{
    const CavityParams cav = cavity();
    return {cav, QdTransition::from_cooperativity(reference + units::ghz_to_rad_per_ns(qd_ghz), gamma_perp,
                                                  cooperativity, cav)};
}

void ScanModel::validate() const
{
    spin.validate();
    if ((system == SystemModel::charged_m1 || system == SystemModel::charged_m2) && channel != Channel::transmission)
    {
        throw DomainError("charged-QD models only describe transmission");
    }
}

double model_intensity(const ModelParameters &params, const ScanModel &model, double laser_omega)
{
    double intensity = 0.0;
    switch (model.system)
    {
    case SystemModel::empty: {
        // Polarization-degenerate cavity with both transitions decoupled.
        ModelParameters uncoupled = params;
        uncoupled.cooperativity = 0.0;
        intensity = polarized_intensity(uncoupled.neutral_system(), laser_omega, model.in, model.out, model.channel);
        break;
    }
    case SystemModel::neutral:
        intensity = polarized_intensity(params.neutral_system(), laser_omega, model.in, model.out, model.channel);
        break;
    case SystemModel::charged_m1:
    case SystemModel::charged_m2: {
        const ChargedQdSystem sys = params.charged_system();
        const auto eval = [&](const JonesVector &out) {
            return model.system == SystemModel::charged_m1 ? m1_transmission(sys, laser_omega, model.in, out, model.spin)
                                                           : m2_transmission(sys, laser_omega, model.in, out, model.spin);
        };
        intensity = model.out ? eval(*model.out)
                              : eval(circular_state(Handedness::plus)) + eval(circular_state(Handedness::minus));
        intensity *= sys.cavity.eta_in * sys.cavity.eta_T;
        break;
    }
    }
    return params.scale * intensity;
}

// ---------------------------------------------------------------------------

void FitProblem::validate() const
{
    if (scans.empty())
    {
        throw DomainError("fit problem has no scans");
    }
    for (const auto &s : scans)
    {
        s.data.validate();
        s.model.validate();
        if (!s.weights.empty() && s.weights.size() != s.data.size())
        {
            throw DomainError("weights must match the scan length");
        }
        for (double w : s.weights)
        {
            if (!(w >= 0.0) || !std::isfinite(w))
            {
                throw DomainError("weights must be finite and non-negative");
            }
        }
    }
    for (std::size_t i = 0; i < free.size(); ++i)
    {
        const auto &p = free[i];
        for (std::size_t j = 0; j < i; ++j)
        {
            if (free[j].id == p.id)
            {
                throw DomainError("parameter '" + parameter_name(p.id) + "' listed twice");
            }
        }
        if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower <= p.upper))
        {
            throw DomainError("bounds of '" + parameter_name(p.id) + "' must be finite and ordered");
        }
        if (!(p.initial >= p.lower && p.initial <= p.upper))
        {
            throw DomainError("initial guess of '" + parameter_name(p.id) + "' lies outside its bounds");
        }
        if (p.id == ParameterId::fss_ghz &&
            std::none_of(scans.begin(), scans.end(), [](const FitScan &s) { return s.model.system == SystemModel::neutral; }))
        {
            throw DomainError("fss_ghz only enters neutral-QD models");
        }
    }
}

std::size_t FitProblem::dimension() const
{
    std::size_t n = 0;
    for (const auto &p : free)
    {
        n += p.shared ? 1 : scans.size();
    }
    return n;
}

std::vector<std::string> FitProblem::coordinate_names() const
{
    std::vector<std::string> names;
    for (const auto &p : free)
    {
        if (p.shared)
        {
            names.push_back(parameter_name(p.id));
            continue;
        }
        for (std::size_t s = 0; s < scans.size(); ++s)
        {
            names.push_back(parameter_name(p.id) + "[" + std::to_string(s) + "]");
        }
    }
    return names;
}

namespace
{
template <typename Getter>
Eigen::VectorXd expand(const FitProblem &problem, Getter get)
{
    Eigen::VectorXd v(problem.dimension());
    Eigen::Index k = 0;
    for (const auto &p : problem.free)
    {
        const std::size_t copies = p.shared ? 1 : problem.scans.size();
        for (std::size_t c = 0; c < copies; ++c)
        {
            v[k++] = get(p);
        }
    }
    return v;
}
} // namespace

Eigen::VectorXd FitProblem::initial() const
{
    return expand(*this, [](const FreeParameter &p) { return p.initial; });
}

Eigen::VectorXd FitProblem::lower() const
{
    return expand(*this, [](const FreeParameter &p) { return p.lower; });
}

Eigen::VectorXd FitProblem::upper() const
{
    return expand(*this, [](const FreeParameter &p) { return p.upper; });
}

std::size_t FitProblem::residual_count() const
{
    std::size_t n = 0;
    for (const auto &s : scans)
    {
        n += s.data.size();
    }
    return n;
}

ModelParameters FitProblem::parameters_for_scan(const Eigen::VectorXd &x, std::size_t scan) const
{
    ModelParameters params = base;
    Eigen::Index k = 0;
    for (const auto &p : free)
    {
        if (p.shared)
        {
            params[p.id] = x[k++];
        }
        else
        {
            params[p.id] = x[k + static_cast<Eigen::Index>(scan)];
            k += static_cast<Eigen::Index>(scans.size());
        }
    }
    return params;
}

Eigen::VectorXd residuals(const FitProblem &problem, const Eigen::VectorXd &x)
{
    Eigen::VectorXd r(problem.residual_count());
    Eigen::Index k = 0;
    for (std::size_t s = 0; s < problem.scans.size(); ++s)
    {
        const FitScan &scan = problem.scans[s];
        const ModelParameters params = problem.parameters_for_scan(x, s);
        const std::vector<double> data = scan.data.intensities();
        for (std::size_t i = 0; i < data.size(); ++i)
        {
            const double diff = model_intensity(params, scan.model, scan.data.grid.omega(i)) - data[i];
            r[k++] = scan.weights.empty() ? diff : std::sqrt(scan.weights[i]) * diff;
        }
    }
    return r;
}

Eigen::MatrixXd finite_difference_jacobian(const FitProblem &problem, const Eigen::VectorXd &x, double relative_step)
{
    Eigen::MatrixXd jac(static_cast<Eigen::Index>(problem.residual_count()), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j)
    {
        const double h = relative_step * std::max(std::abs(x[j]), 1e-2);
        Eigen::VectorXd forward = x;
        Eigen::VectorXd backward = x;
        forward[j] += h;
        backward[j] -= h;
        // Use the actually representable step.
        const double span = forward[j] - backward[j];
        jac.col(j) = (residuals(problem, forward) - residuals(problem, backward)) / span;
    }
    return jac;
}

std::string to_string(Convergence c)
{
    switch (c)
    {
    case Convergence::converged:
        return "converged";
    case Convergence::max_iter:
        return "max_iter";
    case Convergence::singular:
        return "singular";
    }
    return "unknown";
}

const Estimate *FitResult::find(const std::string &name) const
{
    for (const auto &e : estimates)
    {
        if (e.name == name)
        {
            return &e;
        }
    }
    return nullptr;
}

namespace
{
constexpr double kRankTolerance = 1e-8;

// Rank test on the column-normalized Jacobian so that parameter units do not
// matter.
bool rank_deficient(const Eigen::MatrixXd &jac)
{
    Eigen::MatrixXd scaled = jac;
    for (Eigen::Index j = 0; j < scaled.cols(); ++j)
    {
        const double n = scaled.col(j).norm();
        if (!(n > 0.0))
        {
            return true;
        }
        scaled.col(j) /= n;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
    const auto &sv = svd.singularValues();
    return sv[sv.size() - 1] < kRankTolerance * sv[0];
}

Eigen::VectorXd clamp_to_bounds(const Eigen::VectorXd &x, const Eigen::VectorXd &lo, const Eigen::VectorXd &hi)
{
    return x.cwiseMax(lo).cwiseMin(hi);
}

void fill_estimates(FitResult &result, const FitProblem &problem, const Eigen::VectorXd &x, const Eigen::VectorXd &r,
                    const Eigen::MatrixXd &jac, bool covariance_available)
{
    const auto names = problem.coordinate_names();
    std::vector<std::string> units;
    for (const auto &p : problem.free)
    {
        const std::size_t copies = p.shared ? 1 : problem.scans.size();
        units.insert(units.end(), copies, parameter_unit(p.id));
    }

    const auto n = static_cast<double>(r.size());
    const auto dof = n - static_cast<double>(x.size());
    Eigen::MatrixXd covariance;
    if (covariance_available && dof > 0)
    {
        const Eigen::MatrixXd normal = jac.transpose() * jac;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
        if (ldlt.info() == Eigen::Success && ldlt.isPositive())
        {
            const double sigma2 = r.squaredNorm() / dof;
            covariance = sigma2 * ldlt.solve(Eigen::MatrixXd::Identity(x.size(), x.size()));
        }
    }

    result.estimates.clear();
    for (Eigen::Index j = 0; j < x.size(); ++j)
    {
        Estimate e{names[static_cast<std::size_t>(j)], units[static_cast<std::size_t>(j)], x[j], std::nullopt};
        if (covariance.size() > 0 && covariance(j, j) >= 0.0)
        {
            e.uncertainty = std::sqrt(covariance(j, j));
        }
        result.estimates.push_back(e);
    }
    result.residual_norm = r.norm();
    result.parameters = problem.base;
    Eigen::Index k = 0;
    for (const auto &p : problem.free)
    {
        if (p.shared)
        {
            result.parameters[p.id] = x[k];
            ++k;
        }
        else
        {
            k += static_cast<Eigen::Index>(problem.scans.size());
        }
    }
}
} // namespace

FitResult fit(const FitProblem &problem, const FitOptions &options)
{
    problem.validate();
    if (problem.free.empty())
    {
        throw DomainError("fit problem has no free parameters");
    }
    if (options.max_iter < 0 || !(options.tolerance > 0.0) || !(options.initial_damping > 0.0))
    {
        throw DomainError("invalid fit options");
    }

    const Eigen::VectorXd lo = problem.lower();
    const Eigen::VectorXd hi = problem.upper();
    Eigen::VectorXd x = problem.initial();
    Eigen::VectorXd r = residuals(problem, x);
    double cost = r.squaredNorm();
    Eigen::MatrixXd jac = finite_difference_jacobian(problem, x);

    FitResult result;
    result.cost_history.push_back(cost);

    if (rank_deficient(jac))
    {
        result.convergence = Convergence::singular;
        fill_estimates(result, problem, x, r, jac, false);
        return result;
    }

    double damping = options.initial_damping;
    bool done = cost == 0.0;
    int iter = 0;
    while (!done && iter < options.max_iter)
    {
        const Eigen::MatrixXd normal = jac.transpose() * jac;
        const Eigen::VectorXd gradient = jac.transpose() * r;

        // Scale-free stationarity test: cosine between r and each column.
        double worst_cosine = 0.0;
        for (Eigen::Index j = 0; j < x.size(); ++j)
        {
            const double denom = std::sqrt(normal(j, j)) * std::sqrt(cost);
            if (denom > 0.0)
            {
                worst_cosine = std::max(worst_cosine, std::abs(gradient[j]) / denom);
            }
        }
        if (worst_cosine <= options.tolerance)
        {
            done = true;
            break;
        }

        ++iter;
        bool accepted = false;
        while (!accepted)
        {
            Eigen::MatrixXd damped = normal;
            damped.diagonal() += damping * normal.diagonal();
            Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
            {
                result.convergence = Convergence::singular;
                result.iterations = iter;
                fill_estimates(result, problem, x, r, jac, false);
                return result;
            }
            const Eigen::VectorXd step = ldlt.solve(-gradient);
            const Eigen::VectorXd candidate = clamp_to_bounds(x + step, lo, hi);
            const Eigen::VectorXd r_candidate = residuals(problem, candidate);
            const double cost_candidate = r_candidate.squaredNorm();

            if (std::isfinite(cost_candidate) && cost_candidate < cost)
            {
                const Eigen::VectorXd moved = candidate - x;
                x = candidate;
                r = r_candidate;
                cost = cost_candidate;
                result.cost_history.push_back(cost);
                damping = std::max(damping / 10.0, 1e-15);
                accepted = true;

                bool small_step = true;
                for (Eigen::Index j = 0; j < x.size(); ++j)
                {
                    if (std::abs(moved[j]) > options.tolerance * (std::abs(x[j]) + options.tolerance))
                    {
                        small_step = false;
                    }
                }
                if (small_step || cost == 0.0)
                {
                    done = true;
                }
                jac = finite_difference_jacobian(problem, x);
            }
            else
            {
                damping *= 10.0;
                if (damping > 1e20)
                {
                    // No descent direction left at double precision.
                    done = true;
                    break;
                }
            }
        }
    }

    result.iterations = iter;
    result.convergence = done ? Convergence::converged : Convergence::max_iter;
    fill_estimates(result, problem, x, r, jac, true);
    return result;
}

std::string to_string(CouplingRegime regime)
{
    switch (regime)
    {
    case CouplingRegime::weak:
        return "weak";
    case CouplingRegime::intermediate:
        return "intermediate";
    case CouplingRegime::strong:
        return "strong";
    }
    return "unknown";
}

CouplingRegime classify_coupling(double two_g, double kappa, double gamma_perp)
{
    if (two_g <= gamma_perp)
    {
        return CouplingRegime::weak;
    }
    if (two_g < kappa)
    {
        return CouplingRegime::intermediate;
    }
    return CouplingRegime::strong;
}

DerivedQuantities derived_quantities(const FitResult &result, const CavityParams &cav)
{
    if (result.convergence != Convergence::converged)
    {
        throw DomainError("derived quantities need a converged fit");
    }
    DerivedQuantities d;
    d.cooperativity = result.parameters.cooperativity;
    d.gamma_perp = result.parameters.gamma_perp;
    d.kappa = result.parameters.kappa;
    if (!(d.kappa > 0.0) || !(d.gamma_perp > 0.0) || d.cooperativity < 0.0)
    {
        throw DomainError("fit produced unphysical C, kappa or gamma_perp");
    }
    d.g = std::sqrt(d.cooperativity * d.kappa * d.gamma_perp);
    d.two_g = 2.0 * d.g;
    d.regime = classify_coupling(d.two_g, d.kappa, d.gamma_perp);
    d.quality_factor = cav.omega_c / d.kappa;
    d.dephasing_time_ps = 1e3 / d.gamma_perp;
    return d;
}

} // namespace qdcavity

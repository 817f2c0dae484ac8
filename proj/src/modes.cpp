#include "qdcavity/modes.hpp"

#include "qdcavity/core.hpp"
#include "qdcavity/errors.hpp"
#include "qdcavity/units.hpp"

#include <cmath>
#include <string>

namespace qdcavity
{

using units::kPi;

namespace
{
constexpr double kNmPerUm = 1e3;

void require_positive(double value, const char *name)
{
    detail::require_finite(value, name);
    if (!(value > 0.0))
    {
        throw DomainError(std::string(name) + " must be positive");
    }
}

double splitting(const ModeGeometry &geo, Axis axis)
{
    return axis == Axis::x ? geo.delta_lambda_10_nm : geo.delta_lambda_01_nm;
}
} // namespace

void ModeGeometry::validate() const
{
    require_positive(lambda_00_nm, "lambda_00_nm");
    require_positive(delta_lambda_10_nm, "delta_lambda_10_nm");
    require_positive(delta_lambda_01_nm, "delta_lambda_01_nm");
    require_positive(l_cav_um, "l_cav_um");
    detail::require_finite(n0, "n0");
    if (n0 < 1.0)
    {
        throw DomainError("n0 must be >= 1");
    }
}

ModeGeometry ModeGeometry::from_numerical_apertures(double lambda_00_nm, double n0, double l_cav_um, double na_x,
                                                    double na_y)
{
    ModeGeometry geo;
    geo.lambda_00_nm = lambda_00_nm;
    geo.n0 = n0;
    geo.l_cav_um = l_cav_um;
    geo.delta_lambda_10_nm = splitting_for_numerical_aperture(na_x, lambda_00_nm, n0);
    geo.delta_lambda_01_nm = splitting_for_numerical_aperture(na_y, lambda_00_nm, n0);
    geo.validate();
    return geo;
}

double mode_volume(const ModeGeometry &geo)
{
    geo.validate();
    const double lambda_um = geo.lambda_00_nm / kNmPerUm;
    const double split_um = std::sqrt(geo.delta_lambda_01_nm * geo.delta_lambda_10_nm) / kNmPerUm;
    return geo.l_cav_um * lambda_um * lambda_um * lambda_um / (8.0 * kPi * geo.n0 * geo.n0 * split_um);
}

double purcell_factor(double mode_volume_um3, double lambda_nm, double n0, double quality_factor)
{
    require_positive(mode_volume_um3, "mode_volume");
    require_positive(lambda_nm, "lambda_nm");
    require_positive(n0, "n0");
    require_positive(quality_factor, "quality_factor");
    const double reduced_um = lambda_nm / kNmPerUm / n0;
    return 3.0 / (4.0 * kPi * kPi) * reduced_um * reduced_um * reduced_um * quality_factor / mode_volume_um3;
}

double purcell_factor(const ModeGeometry &geo, double quality_factor)
{
    return purcell_factor(mode_volume(geo), geo.lambda_00_nm, geo.n0, quality_factor);
}

double mode_waist(const ModeGeometry &geo, Axis axis)
{
    geo.validate();
    const double lambda = geo.lambda_00_nm;
    const double waist_nm = std::sqrt(lambda * lambda * lambda / (2.0 * splitting(geo, axis))) / (geo.n0 * kPi);
    return waist_nm / kNmPerUm;
}

double numerical_aperture_for_waist(double lambda_nm, double waist_um)
{
    require_positive(lambda_nm, "lambda_nm");
    detail::require_finite(waist_um, "waist");
    if (waist_um <= 0.0)
    {
        throw DomainError("waist must be positive");
    }
    const double divergence = lambda_nm / kNmPerUm / (kPi * waist_um);
    if (divergence >= kPi / 2.0)
    {
        throw DomainError("beam divergence beyond pi/2; paraxial description breaks down");
    }
    return std::sin(divergence);
}

double numerical_aperture(const ModeGeometry &geo, Axis axis)
{
    return numerical_aperture_for_waist(geo.lambda_00_nm, mode_waist(geo, axis));
}

double splitting_for_numerical_aperture(double na, double lambda_00_nm, double n0)
{
    require_positive(lambda_00_nm, "lambda_00_nm");
    require_positive(n0, "n0");
    detail::require_finite(na, "na");
    if (!(na > 0.0 && na < 1.0))
    {
        throw DomainError("numerical aperture must lie in (0, 1)");
    }
    // lambda / (pi w) = n0 sqrt(2 dl / lambda)
    const double root = std::asin(na) / n0;
    return 0.5 * lambda_00_nm * root * root;
}

bool mode_matchable(const ModeGeometry &geo, double objective_na)
{
    return numerical_aperture(geo, Axis::x) < objective_na && numerical_aperture(geo, Axis::y) < objective_na;
}

} // namespace qdcavity

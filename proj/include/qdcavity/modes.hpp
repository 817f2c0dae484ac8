#ifndef QDCAVITY_MODES_HPP
#define QDCAVITY_MODES_HPP

namespace qdcavity
{

// Transverse-mode geometry of a micropillar, inferred from the splitting
// between the fundamental and first-order Hermite-Gaussian modes.
struct ModeGeometry
{
    double lambda_00_nm = 0.0;       // fundamental mode, vacuum
    double delta_lambda_10_nm = 0.0; // lambda_00 - lambda_10
    double delta_lambda_01_nm = 0.0; // lambda_00 - lambda_01
    double n0 = 1.0;
    double l_cav_um = 0.0;

    void validate() const;

    // Splittings chosen so that the far-field NA of the fundamental mode
    // equals (na_x, na_y). Inverts NA = sin(n0 * sqrt(2 dl / lambda)).
    static ModeGeometry from_numerical_apertures(double lambda_00_nm, double n0, double l_cav_um, double na_x,
                                                 double na_y);
};

enum class Axis
{
    x,
    y
};

// um^3
double mode_volume(const ModeGeometry &geo);

// Maximum Purcell factor, 3/(4 pi^2) (lambda/n)^3 Q / V.
double purcell_factor(const ModeGeometry &geo, double quality_factor);
double purcell_factor(double mode_volume_um3, double lambda_nm, double n0, double quality_factor);

// 1/e^2 intensity radius in um. x pairs with delta_lambda_10, y with
// delta_lambda_01.
double mode_waist(const ModeGeometry &geo, Axis axis);

// sin(lambda_00 / (pi w)), vacuum wavelength. Throws DomainError when the
// argument reaches pi/2.
double numerical_aperture(const ModeGeometry &geo, Axis axis);
double numerical_aperture_for_waist(double lambda_nm, double waist_um);

// Splitting (nm) whose fundamental mode has numerical aperture `na`.
double splitting_for_numerical_aperture(double na, double lambda_00_nm, double n0);

// Both far-field NAs fit inside the collection objective.
bool mode_matchable(const ModeGeometry &geo, double objective_na);

} // namespace qdcavity

#endif

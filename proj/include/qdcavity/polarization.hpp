#ifndef QDCAVITY_POLARIZATION_HPP
#define QDCAVITY_POLARIZATION_HPP

#include "qdcavity/core.hpp"

#include <Eigen/Dense>

namespace qdcavity
{

enum class Basis
{
    linear_xy,
    circular_pm
};

enum class Handedness
{
    plus,
    minus
};

// Circular states follow sigma(+/-) = (x +/- i y) / sqrt(2). This fixes the
// change of basis
//   U = 1/sqrt(2) [[1, 1], [i, -i]]   (circular components -> linear components)
// and every cross-basis result in the library goes through it.
const Eigen::Matrix2cd &circular_to_linear();

// Fully polarized light. The global phase is not canonicalized.
class JonesVector
{
public:
    JonesVector(Complex first, Complex second, Basis basis);

    Basis basis() const { return basis_; }
    const Eigen::Vector2cd &components() const { return components_; }
    Complex operator[](int i) const { return components_[i]; }

    JonesVector in_basis(Basis target) const;

    // Unit-norm copy; throws DomainError for the zero vector.
    JonesVector normalized() const;
    double norm() const { return components_.norm(); }

    // The state orthogonal to this one (same basis).
    JonesVector orthogonal() const;

    // Global phase factor, for invariance checks.
    JonesVector with_phase(double radians) const;

private:
    Eigen::Vector2cd components_;
    Basis basis_;
};

class JonesMatrix
{
public:
    JonesMatrix(const Eigen::Matrix2cd &entries, Basis basis) : entries_(entries), basis_(basis) {}

    static JonesMatrix identity(Basis basis = Basis::linear_xy);
    static JonesMatrix diagonal(Complex first, Complex second, Basis basis);

    Basis basis() const { return basis_; }
    const Eigen::Matrix2cd &entries() const { return entries_; }
    Complex operator()(int r, int c) const { return entries_(r, c); }

    JonesMatrix in_basis(Basis target) const;
    JonesVector apply(const JonesVector &in) const;

    double largest_singular_value() const;

private:
    Eigen::Matrix2cd entries_;
    Basis basis_;
};

// Linear polarization at `theta_deg` from the x axis: (cos, sin).
JonesVector linear_state(double theta_deg);
JonesVector circular_state(Handedness sign);

// <out| M |in>, with `in` and `out` first expressed in the basis of `m`.
Complex projected_amplitude(const JonesVector &out, const JonesMatrix &m, const JonesVector &in);

// <a|b>
Complex inner_product(const JonesVector &a, const JonesVector &b);

} // namespace qdcavity

#endif

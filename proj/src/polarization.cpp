#include "qdcavity/polarization.hpp"

#include "qdcavity/errors.hpp"
#include "qdcavity/units.hpp"

#include <cmath>

namespace qdcavity
{

const Eigen::Matrix2cd &circular_to_linear()
{
    static const Eigen::Matrix2cd u = [] {
        const double s = 1.0 / std::sqrt(2.0);
        Eigen::Matrix2cd m;
        m << Complex(s, 0.0), Complex(s, 0.0), Complex(0.0, s), Complex(0.0, -s);
        return m;
    }();
    return u;
}

namespace
{
// Maps components in `from` to components in `to`.
Eigen::Matrix2cd basis_change(Basis from, Basis to)
{
    if (from == to)
    {
        return Eigen::Matrix2cd::Identity();
    }
    if (from == Basis::circular_pm)
    {
        return circular_to_linear();
    }
    return circular_to_linear().adjoint();
}
} // namespace

JonesVector::JonesVector(Complex first, Complex second, Basis basis) : basis_(basis)
{
    detail::require_finite(first.real(), "jones component");
    detail::require_finite(first.imag(), "jones component");
    detail::require_finite(second.real(), "jones component");
    detail::require_finite(second.imag(), "jones component");
    components_ << first, second;
}

JonesVector JonesVector::in_basis(Basis target) const
{
    const Eigen::Vector2cd c = basis_change(basis_, target) * components_;
    return {c[0], c[1], target};
}

JonesVector JonesVector::normalized() const
{
    const double n = norm();
    if (n == 0.0)
    {
        throw DomainError("cannot normalize a zero Jones vector");
    }
    return {components_[0] / n, components_[1] / n, basis_};
}

JonesVector JonesVector::orthogonal() const
{
    return {-std::conj(components_[1]), std::conj(components_[0]), basis_};
}

JonesVector JonesVector::with_phase(double radians) const
{
    const Complex phase = std::polar(1.0, radians);
    return {phase * components_[0], phase * components_[1], basis_};
}

JonesMatrix JonesMatrix::identity(Basis basis)
{
    return {Eigen::Matrix2cd::Identity(), basis};
}

JonesMatrix JonesMatrix::diagonal(Complex first, Complex second, Basis basis)
{
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = first;
    m(1, 1) = second;
    return {m, basis};
}

JonesMatrix JonesMatrix::in_basis(Basis target) const
{
    if (target == basis_)
    {
        return *this;
    }
    const Eigen::Matrix2cd u = basis_change(basis_, target);
    return {u * entries_ * u.adjoint(), target};
}

JonesVector JonesMatrix::apply(const JonesVector &in) const
{
    const Eigen::Vector2cd c = entries_ * in.in_basis(basis_).components();
    return {c[0], c[1], basis_};
}

double JonesMatrix::largest_singular_value() const
{
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(entries_);
    return svd.singularValues()[0];
}

JonesVector linear_state(double theta_deg)
{
    detail::require_finite(theta_deg, "theta");
    // Multiples of 45 degrees are produced exactly so that crossed polarizers
    // at 0/90 give exact zeros.
    const double octant = theta_deg / 45.0;
    if (octant == std::floor(octant) && std::abs(octant) < 1e15)
    {
        const double h = std::sqrt(0.5);
        static constexpr int cos_sign[8] = {1, 1, 0, -1, -1, -1, 0, 1};
        static constexpr int sin_sign[8] = {0, 1, 1, 1, 0, -1, -1, -1};
        const long k = static_cast<long>(octant);
        const int idx = static_cast<int>(((k % 8) + 8) % 8);
        const double mag = (idx % 2 == 1) ? h : 1.0;
        return {Complex(cos_sign[idx] * mag, 0.0), Complex(sin_sign[idx] * mag, 0.0), Basis::linear_xy};
    }
    const double theta = units::degrees_to_radians(theta_deg);
    return {Complex(std::cos(theta), 0.0), Complex(std::sin(theta), 0.0), Basis::linear_xy};
}

JonesVector circular_state(Handedness sign)
{
    return sign == Handedness::plus ? JonesVector(1.0, 0.0, Basis::circular_pm)
                                    : JonesVector(0.0, 1.0, Basis::circular_pm);
}

Complex inner_product(const JonesVector &a, const JonesVector &b)
{
    return a.components().dot(b.in_basis(a.basis()).components());
}

Complex projected_amplitude(const JonesVector &out, const JonesMatrix &m, const JonesVector &in)
{
    const Eigen::Vector2cd e_in = in.in_basis(m.basis()).components();
    const Eigen::Vector2cd e_out = out.in_basis(m.basis()).components();
    // Eigen's dot() conjugates the first argument.
    return e_out.dot(m.entries() * e_in);
}

} // namespace qdcavity

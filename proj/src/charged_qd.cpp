#include "qdcavity/charged_qd.hpp"

#include "qdcavity/errors.hpp"

#include <cmath>
#include <string>

namespace qdcavity
{

SpinState SpinState::balanced()
{
    const double h = std::sqrt(0.5);
    return {Complex(h, 0.0), Complex(h, 0.0)};
}

void SpinState::validate() const
{
    detail::require_finite(alpha.real(), "alpha");
    detail::require_finite(alpha.imag(), "alpha");
    detail::require_finite(beta.real(), "beta");
    detail::require_finite(beta.imag(), "beta");
    const double n = std::norm(alpha) + std::norm(beta);
    if (std::abs(n - 1.0) > 1e-12)
    {
        throw DomainError("spin state must be normalized (|alpha|^2 + |beta|^2 = " + std::to_string(n) + ")");
    }
}

void ChargedQdSystem::validate() const
{
    cavity.validate();
    trion.validate();
}

ChannelAmplitudes channel_amplitudes(const ChargedQdSystem &sys, double laser_omega)
{
    sys.validate();
    return {transmission_amplitude(laser_omega, sys.cavity, sys.trion),
            transmission_amplitude(laser_omega, sys.cavity)};
}

namespace
{
struct Circular
{
    Complex plus;  // gamma
    Complex minus; // delta
};

Circular circular_components(const JonesVector &v)
{
    const JonesVector c = v.in_basis(Basis::circular_pm);
    return {c[0], c[1]};
}
} // namespace

double m1_transmission(const ChargedQdSystem &sys, double laser_omega, const JonesVector &in, const JonesVector &out,
                       const SpinState &spin)
{
    spin.validate();
    const auto [t1, tc] = channel_amplitudes(sys, laser_omega);
    const Circular i = circular_components(in);
    const Circular o = circular_components(out);
    // Projection onto <out| conjugates the analyzer components.
    const Complex pp = i.plus * std::conj(o.plus);
    const Complex mm = i.minus * std::conj(o.minus);
    return std::norm(t1 * pp + tc * mm) * std::norm(spin.alpha) + std::norm(tc * pp + t1 * mm) * std::norm(spin.beta);
}

M2Channels m2_channels(const ChargedQdSystem &sys, double laser_omega, const JonesVector &in, const JonesVector &out,
                       const SpinState &spin)
{
    spin.validate();
    const auto [t1, tc] = channel_amplitudes(sys, laser_omega);

    M2Channels ch;
    const double tc2 = std::norm(tc);
    const double coop = sys.trion.cooperativity(sys.cavity);
    double qd_response = 1.0;
    if (coop != 0.0)
    {
        const double qd_detuning = (laser_omega - sys.trion.omega_qd) / sys.trion.gamma_perp;
        qd_response = std::norm(1.0 / (1.0 + 2.0 * coop / Complex(1.0, -qd_detuning)));
    }
    ch.t0 = tc2 * qd_response;
    ch.t1_prime = std::norm(t1) - ch.t0;
    ch.tc_prime = tc2 - ch.t0;

    // Tolerance for rounding; anything below is a genuine clamp.
    const double tol = 1e-14 * tc2;
    if (ch.t1_prime < 0.0)
    {
        ch.clamped = ch.t1_prime < -tol;
        ch.t1_prime = 0.0;
    }
    if (ch.tc_prime < 0.0)
    {
        ch.clamped = ch.clamped || ch.tc_prime < -tol;
        ch.tc_prime = 0.0;
    }

    const Circular i = circular_components(in);
    const Circular o = circular_components(out);
    const Complex overlap_plus = std::conj(o.plus);   // <out|+>
    const Complex overlap_minus = std::conj(o.minus); // <out|->
    const Complex overlap = overlap_plus * i.plus + overlap_minus * i.minus;

    ch.uninteracted = ch.t0 * std::norm(overlap);
    ch.plus_up = ch.t1_prime * std::norm(i.plus * spin.alpha * overlap_plus);
    ch.minus_up = ch.tc_prime * std::norm(i.minus * spin.alpha * overlap_minus);
    ch.plus_down = ch.tc_prime * std::norm(i.plus * spin.beta * overlap_plus);
    ch.minus_down = ch.t1_prime * std::norm(i.minus * spin.beta * overlap_minus);
    return ch;
}

double m2_transmission(const ChargedQdSystem &sys, double laser_omega, const JonesVector &in, const JonesVector &out,
                       const SpinState &spin, M2Diagnostics *diagnostics)
{
    const M2Channels ch = m2_channels(sys, laser_omega, in, out, spin);
    if (ch.clamped && diagnostics)
    {
        ++diagnostics->clamped;
    }
    return ch.total();
}

double contrast(double transmitted, Complex tc)
{
    const double tc2 = std::norm(tc);
    if (!(tc2 > 0.0))
    {
        throw DomainError("contrast undefined for zero empty-cavity transmission");
    }
    detail::require_finite(transmitted, "transmitted");
    return (tc2 - transmitted) / tc2;
}

std::array<Complex, 4> entangled_output_state(const ChargedQdSystem &sys, double laser_omega, const JonesVector &in,
                                              const SpinState &spin)
{
    spin.validate();
    const auto [t1, tc] = channel_amplitudes(sys, laser_omega);
    const Circular i = circular_components(in);
    return {t1 * i.plus * spin.alpha, tc * i.plus * spin.beta, tc * i.minus * spin.alpha, t1 * i.minus * spin.beta};
}

SpectralScan charged_spectrum(const ChargedQdSystem &sys, const FrequencyGrid &grid, ChargedModel model,
                              const JonesVector &in, const std::optional<JonesVector> &out, const SpinState &spin,
                              M2Diagnostics *diagnostics)
{
    sys.validate();
    spin.validate();
    const auto evaluate = [&](double omega, const JonesVector &analyzer) {
        return model == ChargedModel::coherent_m1 ? m1_transmission(sys, omega, in, analyzer, spin)
                                                  : m2_transmission(sys, omega, in, analyzer, spin, diagnostics);
    };

    SpectralScan scan;
    scan.kind = ScanKind::transmittivity;
    scan.grid = grid;
    scan.values.resize(grid.size());
    const JonesVector plus = circular_state(Handedness::plus);
    const JonesVector minus = circular_state(Handedness::minus);
    const double efficiency = sys.cavity.eta_in * sys.cavity.eta_T;
    for (std::size_t k = 0; k < grid.size(); ++k)
    {
        const double omega = grid.omega(k);
        scan.values[k] = efficiency * (out ? evaluate(omega, *out) : evaluate(omega, plus) + evaluate(omega, minus));
    }
    return scan;
}

} // namespace qdcavity

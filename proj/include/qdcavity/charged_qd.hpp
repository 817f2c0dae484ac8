#ifndef QDCAVITY_CHARGED_QD_HPP
#define QDCAVITY_CHARGED_QD_HPP

#include "qdcavity/core.hpp"
#include "qdcavity/polarization.hpp"

#include <array>
#include <cstddef>
#include <optional>

namespace qdcavity
{

// Resident electron spin, alpha|up> + beta|down>.
struct SpinState
{
    Complex alpha{1.0, 0.0};
    Complex beta{0.0, 0.0};

    static SpinState balanced();
    static SpinState up() { return {}; }
    static SpinState down() { return {Complex(0.0), Complex(1.0)}; }

    void validate() const;
};

// Negatively charged QD: degenerate sigma+/sigma- trion transitions.
// sigma+ couples to spin up, sigma- to spin down.
struct ChargedQdSystem
{
    CavityParams cavity;
    QdTransition trion;

    void validate() const;
};

struct ChannelAmplitudes
{
    Complex t1; // photon resonant with the transition allowed by the spin
    Complex tc; // empty cavity
};

ChannelAmplitudes channel_amplitudes(const ChargedQdSystem &sys, double laser_omega);

// Coherent model: project on `out` and trace over the spin.
double m1_transmission(const ChargedQdSystem &sys, double laser_omega, const JonesVector &in,
                       const JonesVector &out, const SpinState &spin = SpinState::balanced());

// The five incoherent channels of the decoherent model, already weighted by
// their polarization/spin factors. Their sum is the transmitted intensity.
struct M2Channels
{
    double uninteracted = 0.0;      // T0 |<out|in>|^2
    double plus_up = 0.0;           // T1' |gamma alpha <out|+>|^2
    double minus_up = 0.0;          // Tc' |delta alpha <out|->|^2
    double plus_down = 0.0;         // Tc' |gamma beta <out|+>|^2
    double minus_down = 0.0;        // T1' |delta beta <out|->|^2
    double t0 = 0.0;
    double t1_prime = 0.0;
    double tc_prime = 0.0;
    bool clamped = false;

    double total() const { return uninteracted + plus_up + minus_up + plus_down + minus_down; }
};

// Counts how often T1' or Tc' had to be clamped at zero.
struct M2Diagnostics
{
    std::size_t clamped = 0;
};

M2Channels m2_channels(const ChargedQdSystem &sys, double laser_omega, const JonesVector &in,
                       const JonesVector &out, const SpinState &spin = SpinState::balanced());

// Decoherent model: incoherent sum of the five channels.
double m2_transmission(const ChargedQdSystem &sys, double laser_omega, const JonesVector &in,
                       const JonesVector &out, const SpinState &spin = SpinState::balanced(),
                       M2Diagnostics *diagnostics = nullptr);

// (|tc|^2 - T) / |tc|^2
double contrast(double transmitted, Complex tc);

// Unnormalized amplitudes over {+up, +down, -up, -down}.
std::array<Complex, 4> entangled_output_state(const ChargedQdSystem &sys, double laser_omega, const JonesVector &in,
                                              const SpinState &spin = SpinState::balanced());

enum class ChargedModel
{
    coherent_m1,
    decoherent_m2
};

// Spectrum for either model, scaled by the mode-matching factor eta_in eta_T.
// Without an analyzer the intensity is summed over a complete output basis.
SpectralScan charged_spectrum(const ChargedQdSystem &sys, const FrequencyGrid &grid, ChargedModel model,
                              const JonesVector &in, const std::optional<JonesVector> &out,
                              const SpinState &spin = SpinState::balanced(), M2Diagnostics *diagnostics = nullptr);

} // namespace qdcavity

#endif

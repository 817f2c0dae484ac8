#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdcavity/charged_qd.hpp"
#include "qdcavity/errors.hpp"
#include "qdcavity/units.hpp"

#include <cmath>
#include <random>

using namespace qdcavity;

namespace
{

ChargedQdSystem reference_system(double cooperativity = 0.13)
{
    ChargedQdSystem sys;
    sys.cavity.omega_c = units::wavelength_nm_to_omega(940.0);
    sys.cavity.kappa_m = 11.0;
    sys.cavity.kappa_s = 55.0;
    sys.trion = QdTransition::from_cooperativity(sys.cavity.omega_c, 9.5, cooperativity, sys.cavity);
    return sys;
}

JonesVector plus() { return circular_state(Handedness::plus); }
JonesVector minus() { return circular_state(Handedness::minus); }

JonesVector random_state(std::mt19937_64 &rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    return JonesVector(Complex(n(rng), n(rng)), Complex(n(rng), n(rng)), Basis::linear_xy).normalized();
}

SpinState random_spin(std::mt19937_64 &rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Complex a(n(rng), n(rng)), b(n(rng), n(rng));
    const double s = std::sqrt(std::norm(a) + std::norm(b));
    return {a / s, b / s};
}

// Independent coherent-model oracle: build the photon-spin state, project on
// the analyzer, trace the spin.
double m1_oracle(const ChargedQdSystem &sys, double w, const JonesVector &in, const JonesVector &out,
                 const SpinState &spin)
{
    const auto s = entangled_output_state(sys, w, in, spin);
    const JonesVector o = out.in_basis(Basis::circular_pm);
    const Complex up = std::conj(o[0]) * s[0] + std::conj(o[1]) * s[2];
    const Complex down = std::conj(o[0]) * s[1] + std::conj(o[1]) * s[3];
    return std::norm(up) + std::norm(down);
}

} // namespace

TEST_CASE("channel amplitudes")
{
    const ChargedQdSystem sys = reference_system();
    const ChannelAmplitudes a = channel_amplitudes(sys, sys.cavity.omega_c);
    CHECK(a.tc.real() == doctest::Approx(22.0 / 77.0).epsilon(1e-12));
    CHECK(a.t1.real() == doctest::Approx(22.0 / 77.0 / 1.26).epsilon(1e-12));
    CHECK(a.t1.real() == doctest::Approx(0.2268).epsilon(1e-3));
    const ChannelAmplitudes zero = channel_amplitudes(reference_system(0.0), sys.cavity.omega_c);
    CHECK(zero.t1 == zero.tc);
    ChargedQdSystem detuned = sys;
    detuned.trion.omega_qd += 1e6;
    const ChannelAmplitudes far = channel_amplitudes(detuned, sys.cavity.omega_c);
    CHECK(std::abs(far.t1 - far.tc) < 1e-5);
}

TEST_CASE("coherent model examples")
{
    const ChargedQdSystem sys = reference_system();
    const double w = sys.cavity.omega_c;
    const Complex tc = channel_amplitudes(sys, w).tc;
    const double ratio = 1.0 / 1.26;
    CHECK(contrast(m1_transmission(sys, w, plus(), plus()), tc) ==
          doctest::Approx(0.5 * (1.0 - ratio * ratio)).epsilon(1e-10));
    CHECK(contrast(m1_transmission(sys, w, plus(), plus()), tc) == doctest::Approx(0.185).epsilon(0.005 / 0.185));
    for (const SpinState spin : {SpinState::balanced(), SpinState::up(), SpinState::down()})
    {
        CHECK(m1_transmission(sys, w, plus(), minus(), spin) == 0.0);
        CHECK(m1_transmission(sys, w + 20.0, minus(), plus(), spin) == 0.0);
    }
    const double parallel = m1_transmission(sys, w, linear_state(0.0), linear_state(0.0));
    const ChannelAmplitudes a = channel_amplitudes(sys, w);
    CHECK(parallel == doctest::Approx(std::norm((a.t1 + a.tc) / 2.0)).epsilon(1e-12));
    CHECK(contrast(parallel, tc) == doctest::Approx(0.196).epsilon(0.002 / 0.196));
    // Crossed linear polarizers: the coherent model leaves |t1 - tc|^2 / 4.
    const double crossed = m1_transmission(sys, w, linear_state(0.0), linear_state(90.0));
    CHECK(crossed == doctest::Approx(std::norm(a.t1 - a.tc) / 4.0).epsilon(1e-12));
}

TEST_CASE("decoherent model examples")
{
    const ChargedQdSystem sys = reference_system();
    const double w = sys.cavity.omega_c;
    const Complex tc = channel_amplitudes(sys, w).tc;
    const double ratio = 1.0 / 1.26;
    const double crossed = m2_transmission(sys, w, linear_state(0.0), linear_state(90.0));
    CHECK(crossed / std::norm(tc) == doctest::Approx(0.25 * (1.0 - ratio * ratio)).epsilon(1e-10));
    CHECK(crossed / std::norm(tc) == doctest::Approx(0.0925).epsilon(0.002 / 0.0925));
    const double parallel = m2_transmission(sys, w, linear_state(0.0), linear_state(0.0));
    CHECK(contrast(parallel, tc) == doctest::Approx(0.75 * (1.0 - ratio * ratio)).epsilon(1e-10));
    CHECK(contrast(parallel, tc) == doctest::Approx(0.278).epsilon(0.002 / 0.278));
    // The decoherent model leaves far more light in the crossed channel.
    CHECK(crossed > 5.0 * m1_transmission(sys, w, linear_state(0.0), linear_state(90.0)));
}

TEST_CASE("T0 follows the printed product formula")
{
    ChargedQdSystem sys = reference_system(0.6);
    sys.trion.omega_qd += 4.0;
    const double w = sys.cavity.omega_c + 2.5;
    const M2Channels ch = m2_channels(sys, w, linear_state(0.0), linear_state(0.0));
    const Complex tc = channel_amplitudes(sys, w).tc;
    const Complex i(0.0, 1.0);
    const double dqd = (w - sys.trion.omega_qd) / sys.trion.gamma_perp;
    const double oracle = std::norm(tc) * std::norm(1.0 / (1.0 + 2.0 * 0.6 / (1.0 - i * dqd)));
    CHECK(ch.t0 == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(ch.tc_prime == doctest::Approx(std::norm(tc) - oracle).epsilon(1e-12));
}

TEST_CASE("contrast")
{
    const Complex tc(0.3, 0.1);
    CHECK(contrast(std::norm(tc), tc) == doctest::Approx(0.0));
    CHECK(contrast(0.0, tc) == 1.0);
    CHECK(contrast(0.5 * std::norm(tc), tc) == doctest::Approx(0.5));
    CHECK_THROWS_AS(contrast(0.1, Complex(0.0)), DomainError);
}

TEST_CASE("entangled output state")
{
    const ChargedQdSystem sys = reference_system();
    const double w = sys.cavity.omega_c + 1.0;
    const ChannelAmplitudes a = channel_amplitudes(sys, w);
    const auto up = entangled_output_state(sys, w, plus(), SpinState::up());
    CHECK(std::abs(up[0] - a.t1) < 1e-15);
    CHECK(up[1] == Complex(0.0));
    CHECK(up[2] == Complex(0.0));
    CHECK(up[3] == Complex(0.0));

    // Without coupling the output is tc times a product state.
    const ChargedQdSystem empty = reference_system(0.0);
    const JonesVector in = linear_state(30.0).in_basis(Basis::circular_pm);
    const SpinState spin = SpinState::balanced();
    const auto s = entangled_output_state(empty, w, in, spin);
    const Complex tc = channel_amplitudes(empty, w).tc;
    CHECK(std::abs(s[0] - tc * in[0] * spin.alpha) < 1e-15);
    CHECK(std::abs(s[1] - tc * in[0] * spin.beta) < 1e-15);
    CHECK(std::abs(s[2] - tc * in[1] * spin.alpha) < 1e-15);
    CHECK(std::abs(s[3] - tc * in[1] * spin.beta) < 1e-15);
    // Schmidt test: the 2x2 coefficient matrix has zero determinant.
    CHECK(std::abs(s[0] * s[3] - s[1] * s[2]) < 1e-15);

    // Tracing the spin reproduces the coherent model for random analyzers.
    std::mt19937_64 rng(41);
    for (int k = 0; k < 8; ++k)
    {
        const JonesVector out = random_state(rng);
        CHECK(m1_transmission(sys, sys.cavity.omega_c, linear_state(45.0), out) ==
              doctest::Approx(m1_oracle(sys, sys.cavity.omega_c, linear_state(45.0), out, spin)).epsilon(1e-12));
    }
}

TEST_CASE("models agree for circular input")
{
    const ChargedQdSystem sys = reference_system();
    const double kappa = sys.cavity.kappa();
    std::mt19937_64 rng(43);
    for (int i = 0; i <= 200; ++i)
    {
        const double w = sys.cavity.omega_c - 10.0 * kappa + 20.0 * kappa * i / 200.0;
        for (const JonesVector &in : {plus(), minus()})
        {
            for (const JonesVector &out : {plus(), minus(), linear_state(0.0), random_state(rng)})
            {
                const double m1 = m1_transmission(sys, w, in, out);
                const double m2 = m2_transmission(sys, w, in, out);
                CHECK(std::abs(m1 - m2) <= 1e-12);
            }
        }
    }
}

TEST_CASE("both models reduce to the empty cavity without coupling")
{
    const ChargedQdSystem sys = reference_system(0.0);
    std::mt19937_64 rng(47);
    for (int k = 0; k < 20; ++k)
    {
        const JonesVector in = random_state(rng);
        const JonesVector out = random_state(rng);
        const SpinState spin = random_spin(rng);
        const double w = sys.cavity.omega_c + 30.0 * (k - 10);
        const double ref = std::norm(inner_product(out, in)) * std::norm(channel_amplitudes(sys, w).tc);
        CHECK(m1_transmission(sys, w, in, out, spin) == doctest::Approx(ref).epsilon(1e-12));
        CHECK(m2_transmission(sys, w, in, out, spin) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("phase and relabeling invariances")
{
    const ChargedQdSystem sys = reference_system();
    std::mt19937_64 rng(53);
    for (int k = 0; k < 30; ++k)
    {
        const JonesVector in = random_state(rng).in_basis(Basis::circular_pm);
        const JonesVector out = random_state(rng).in_basis(Basis::circular_pm);
        const SpinState spin = random_spin(rng);
        const double w = sys.cavity.omega_c + 5.0 * (k - 15);
        const double m1 = m1_transmission(sys, w, in, out, spin);
        const double m2 = m2_transmission(sys, w, in, out, spin);
        CHECK(m1_transmission(sys, w, in.with_phase(1.3), out, spin) == doctest::Approx(m1).epsilon(1e-12));
        CHECK(m2_transmission(sys, w, in.with_phase(-0.4), out, spin) == doctest::Approx(m2).epsilon(1e-12));

        // sigma+ <-> sigma- together with up <-> down.
        const JonesVector in_s(in[1], in[0], Basis::circular_pm);
        const JonesVector out_s(out[1], out[0], Basis::circular_pm);
        const SpinState spin_s{spin.beta, spin.alpha};
        CHECK(m1_transmission(sys, w, in_s, out_s, spin_s) == doctest::Approx(m1).epsilon(1e-12));
        CHECK(m2_transmission(sys, w, in_s, out_s, spin_s) == doctest::Approx(m2).epsilon(1e-12));
    }
}

TEST_CASE("transmission bounds")
{
    const ChargedQdSystem sys = reference_system();
    std::mt19937_64 rng(59);
    for (int k = 0; k < 200; ++k)
    {
        const JonesVector in = random_state(rng);
        const JonesVector out = random_state(rng);
        const SpinState spin = random_spin(rng);
        const double w = sys.cavity.omega_c + 2.0 * (k - 100);
        const ChannelAmplitudes a = channel_amplitudes(sys, w);
        const double bound = std::norm(a.tc) * std::max(1.0, std::norm(a.t1 / a.tc));
        for (double t : {m1_transmission(sys, w, in, out, spin), m2_transmission(sys, w, in, out, spin)})
        {
            CHECK(t >= 0.0);
            CHECK(t <= bound * (1.0 + 1e-12));
            CHECK(t <= std::norm(a.tc) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("M2 completeness over an output basis")
{
    const ChargedQdSystem sys = reference_system();
    std::mt19937_64 rng(61);
    for (int k = 0; k < 50; ++k)
    {
        const JonesVector in = random_state(rng).in_basis(Basis::circular_pm);
        const JonesVector out = random_state(rng);
        const SpinState spin = random_spin(rng);
        const double w = sys.cavity.omega_c + 0.5 * (k - 25);
        const M2Channels a = m2_channels(sys, w, in, out, spin);
        const M2Channels b = m2_channels(sys, w, in, out.orthogonal(), spin);
        for (const M2Channels &c : {a, b})
        {
            CHECK(c.uninteracted >= 0.0);
            CHECK(c.plus_up >= 0.0);
            CHECK(c.minus_up >= 0.0);
            CHECK(c.plus_down >= 0.0);
            CHECK(c.minus_down >= 0.0);
        }
        const double g = std::norm(in[0]), d = std::norm(in[1]);
        const double up = std::norm(spin.alpha), down = std::norm(spin.beta);
        const double expected = a.t0 + a.t1_prime * (g * up + d * down) + a.tc_prime * (d * up + g * down);
        CHECK(a.total() + b.total() == doctest::Approx(expected).epsilon(1e-12));
        // For balanced spin this is the looser form with the average of T1' and Tc'.
        if (k == 0)
        {
            const M2Channels p = m2_channels(sys, w, in, out, SpinState::balanced());
            const M2Channels q = m2_channels(sys, w, in, out.orthogonal(), SpinState::balanced());
            CHECK(p.total() + q.total() == doctest::Approx(p.t0 + 0.5 * (p.t1_prime + p.tc_prime)).epsilon(1e-12));
        }
    }
}

TEST_CASE("negative T1' is clamped and counted")
{
    ChargedQdSystem sys = reference_system(0.13);
    sys.trion.omega_qd += 60.0; // QD far from the cavity
    const FrequencyGrid grid = FrequencyGrid::linspace_ghz(sys.cavity.omega_c, -40.0, 40.0, 201);
    M2Diagnostics diag;
    const SpectralScan scan =
        charged_spectrum(sys, grid, ChargedModel::decoherent_m2, linear_state(0.0), linear_state(0.0),
                         SpinState::balanced(), &diag);
    CHECK(diag.clamped > 0);
    for (double v : scan.intensities())
        CHECK(v >= 0.0);
    // Resonant system needs no clamp.
    M2Diagnostics resonant;
    charged_spectrum(reference_system(), grid, ChargedModel::decoherent_m2, linear_state(0.0), linear_state(0.0),
                     SpinState::balanced(), &resonant);
    CHECK(resonant.clamped == 0);
}

TEST_CASE("lin1/lin2 orientation does not matter for balanced M2")
{
    const ChargedQdSystem sys = reference_system();
    for (double d : {-20.0, -3.0, 0.0, 8.0})
    {
        const double w = sys.cavity.omega_c + d;
        const double a = m2_transmission(sys, w, linear_state(0.0), linear_state(90.0));
        const double b = m2_transmission(sys, w, linear_state(45.0), linear_state(135.0));
        const double c = m2_transmission(sys, w, linear_state(0.0), linear_state(0.0));
        const double e = m2_transmission(sys, w, linear_state(45.0), linear_state(45.0));
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
        CHECK(c == doctest::Approx(e).epsilon(1e-12));
    }
}

TEST_CASE("spectrum without analyzer sums a complete basis")
{
    const ChargedQdSystem sys = reference_system();
    const FrequencyGrid grid = FrequencyGrid::linspace_ghz(sys.cavity.omega_c, -10.0, 10.0, 21);
    for (ChargedModel model : {ChargedModel::coherent_m1, ChargedModel::decoherent_m2})
    {
        const SpectralScan all = charged_spectrum(sys, grid, model, linear_state(0.0), std::nullopt);
        const SpectralScan par = charged_spectrum(sys, grid, model, linear_state(0.0), linear_state(0.0));
        const SpectralScan crs = charged_spectrum(sys, grid, model, linear_state(0.0), linear_state(90.0));
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(all.values[i].real() == doctest::Approx(par.values[i].real() + crs.values[i].real()).epsilon(1e-12));
    }
}

TEST_CASE("spin validation")
{
    CHECK_NOTHROW(SpinState::balanced().validate());
    CHECK_THROWS_AS((SpinState{Complex(1.0), Complex(1.0)}.validate()), DomainError);
}

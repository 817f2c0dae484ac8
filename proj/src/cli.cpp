#include "qdcavity/cli.hpp"

#include "qdcavity/charged_qd.hpp"
#include "qdcavity/errors.hpp"
#include "qdcavity/fitting.hpp"
#include "qdcavity/io.hpp"
#include "qdcavity/modes.hpp"
#include "qdcavity/neutral_qd.hpp"
#include "qdcavity/units.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

namespace qdcavity::cli
{

namespace fs = std::filesystem;

namespace
{

class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

std::string fixed(double v, int significant = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, v);
    return buf;
}

// ---------------------------------------------------------------------------
// Polarization settings shared by `spectrum`, `fit` and `figure`.

struct Polarizers
{
    Basis basis = Basis::linear_xy;
    std::string theta_in = "0";
    std::optional<std::string> theta_out; // absent: no analyzer
};

Basis parse_basis(const std::string &name)
{
    if (name == "linear")
        return Basis::linear_xy;
    if (name == "circular")
        return Basis::circular_pm;
    throw UsageError("unknown polarization basis '" + name + "'");
}

std::string basis_name(Basis b)
{
    return b == Basis::linear_xy ? "linear" : "circular";
}

JonesVector parse_state(const std::string &text, Basis basis, const char *flag)
{
    if (basis == Basis::circular_pm)
    {
        if (text == "+" || text == "plus" || text == "sigma+")
            return circular_state(Handedness::plus);
        if (text == "-" || text == "minus" || text == "sigma-")
            return circular_state(Handedness::minus);
        throw UsageError(std::string(flag) + " expects + or - with --pol-basis circular, got '" + text + "'");
    }
    try
    {
        return linear_state(io::parse_number(text));
    }
    catch (const ParseError &)
    {
        throw UsageError(std::string(flag) + " expects an angle in degrees with --pol-basis linear, got '" + text + "'");
    }
}

void annotate(SpectralScan &scan, const std::string &system, const Polarizers &pol, const std::string &channel)
{
    scan.metadata["system"] = system;
    scan.metadata["channel"] = channel;
    scan.metadata["pol_basis"] = basis_name(pol.basis);
    scan.metadata["theta_in"] = pol.theta_in;
    scan.metadata["theta_out"] = pol.theta_out.value_or("none");
}

FrequencyGrid parse_grid(const std::string &spec, double reference)
{
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':'))
    {
        parts.push_back(item);
    }
    if (parts.size() != 3)
    {
        throw UsageError("--grid expects start:stop:points, got '" + spec + "'");
    }
    try
    {
        const double start = io::parse_number(parts[0]);
        const double stop = io::parse_number(parts[1]);
        const double points = io::parse_number(parts[2]);
        if (points < 2 || points != std::floor(points) || points > 1e7 || !(stop > start))
        {
            throw UsageError("--grid needs stop > start and an integer number of points >= 2");
        }
        return FrequencyGrid::linspace_ghz(reference, start, stop, static_cast<std::size_t>(points));
    }
    catch (const ParseError &)
    {
        throw UsageError("--grid expects start:stop:points, got '" + spec + "'");
    }
}

// ---------------------------------------------------------------------------
// Forward models for the configured device.

SpectralScan compute_spectrum(const io::Config &cfg, SystemModel system, Channel channel, const FrequencyGrid &grid,
                              const JonesVector &in, const std::optional<JonesVector> &out)
{
    SpectralScan scan;
    scan.kind = channel == Channel::transmission ? ScanKind::transmittivity : ScanKind::reflectivity;
    scan.grid = grid;
    scan.values.resize(grid.size());
    switch (system)
    {
    case SystemModel::empty: {
        // The empty cavity is a neutral system with both lines decoupled.
        NeutralQdSystem sys;
        sys.cavity = cfg.cavity();
        sys.qd_x = QdTransition{sys.cavity.omega_c, 1.0, 0.0};
        sys.qd_y = sys.qd_x;
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
            scan.values[i] = polarized_intensity(sys, grid.omega(i), in, out, channel);
        }
        break;
    }
    case SystemModel::neutral: {
        const NeutralQdSystem sys = cfg.neutral_system();
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
            scan.values[i] = polarized_intensity(sys, grid.omega(i), in, out, channel);
        }
        break;
    }
    case SystemModel::charged_m1:
    case SystemModel::charged_m2: {
        if (channel != Channel::transmission)
        {
            throw UsageError("charged-QD models only describe transmission (--channel T)");
        }
        const ChargedQdSystem sys = cfg.charged_system();
        M2Diagnostics diag;
        const ChargedModel model =
            system == SystemModel::charged_m1 ? ChargedModel::coherent_m1 : ChargedModel::decoherent_m2;
        scan = charged_spectrum(sys, grid, model, in, out, cfg.spin(), &diag);
        if (diag.clamped > 0)
        {
            scan.metadata["m2_clamped_points"] = std::to_string(diag.clamped);
        }
        break;
    }
    }
    return scan;
}

SpectralScan build_scan(const io::Config &cfg, SystemModel system, Channel channel, const FrequencyGrid &grid,
                        const Polarizers &pol)
{
    const JonesVector in = parse_state(pol.theta_in, pol.basis, "--theta-in");
    std::optional<JonesVector> out;
    if (pol.theta_out)
    {
        out = parse_state(*pol.theta_out, pol.basis, "--theta-out");
    }
    SpectralScan scan = compute_spectrum(cfg, system, channel, grid, in, out);
    annotate(scan, to_string(system), pol, channel == Channel::transmission ? "T" : "R");
    return scan;
}

std::vector<Extremum> extrema(const SpectralScan &scan, bool maxima)
{
    const std::vector<double> y = scan.intensities();
    std::vector<Extremum> found;
    for (std::size_t i = 1; i + 1 < y.size(); ++i)
    {
        const double sign = maxima ? 1.0 : -1.0;
        if (sign * y[i] > sign * y[i - 1] && sign * y[i] > sign * y[i + 1])
        {
            const double x0 = units::rad_per_ns_to_ghz(scan.grid.offsets[i - 1]);
            const double x1 = units::rad_per_ns_to_ghz(scan.grid.offsets[i]);
            const double x2 = units::rad_per_ns_to_ghz(scan.grid.offsets[i + 1]);
            // Vertex of the parabola through the three points.
            const double d1 = (y[i] - y[i - 1]) / (x1 - x0);
            const double d2 = (y[i + 1] - y[i]) / (x2 - x1);
            const double curvature = (d2 - d1) / (x2 - x0);
            double xv = x1;
            double yv = y[i];
            if (curvature != 0.0)
            {
                xv = 0.5 * (x0 + x1) - d1 / (2.0 * curvature);
                xv = std::clamp(xv, x0, x2);
                yv = y[i] + d1 * (xv - x1) + curvature * (xv - x0) * (xv - x1);
            }
            found.push_back({xv, yv});
        }
    }
    return found;
}

std::string describe(const std::vector<Extremum> &points)
{
    std::string s = "[";
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        s += (i ? ", " : "") + fixed(points[i].frequency_ghz, 4);
    }
    return s + "]";
}

void print_summary(const SpectralScan &scan, std::ostream &out)
{
    const std::vector<double> y = scan.intensities();
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    const auto at = [&](auto it) {
        return units::rad_per_ns_to_ghz(scan.grid.offsets[static_cast<std::size_t>(it - y.begin())]);
    };
    out << "points: " << y.size() << "\n";
    out << "min: " << fixed(*lo, 6) << " at " << fixed(at(lo), 4) << " GHz\n";
    out << "max: " << fixed(*hi, 6) << " at " << fixed(at(hi), 4) << " GHz\n";
    out << "peaks_ghz: " << describe(local_maxima(scan)) << "\n";
    out << "dips_ghz: " << describe(local_minima(scan)) << "\n";
}

// ---------------------------------------------------------------------------
// Commands

struct SpectrumArgs
{
    std::string config;
    std::string system;
    std::string channel = "T";
    std::string basis = "linear";
    std::string theta_in = "0";
    std::string theta_out;
    bool no_analyzer = false;
    std::string grid = "-20:20:401";
    std::string out;
};

Channel parse_channel(const std::string &c)
{
    if (c == "T")
        return Channel::transmission;
    if (c == "R")
        return Channel::reflection;
    throw UsageError("--channel expects T or R");
}

int cmd_spectrum(const SpectrumArgs &a, std::ostream &out)
{
    const io::Config cfg = io::read_config(a.config);
    Polarizers pol;
    pol.basis = parse_basis(a.basis);
    pol.theta_in = a.theta_in;
    if (!a.theta_out.empty())
    {
        pol.theta_out = a.theta_out;
    }
    const SystemModel system = system_model_from_string(a.system);
    const SpectralScan scan =
        build_scan(cfg, system, parse_channel(a.channel), parse_grid(a.grid, cfg.reference_omega()), pol);
    io::write_scan(scan, a.out);
    out << "wrote " << a.out << "\n";
    print_summary(scan, out);
    return kOk;
}

struct FitArgs
{
    std::string config;
    std::vector<std::string> data;
    std::string free;
    std::string per_scan;
    std::string out;
};

std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> items;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        if (!item.empty())
        {
            items.push_back(item);
        }
    }
    return items;
}

std::pair<double, double> default_bounds(ParameterId id)
{
    switch (id)
    {
    case ParameterId::cooperativity:
        return {0.0, 100.0};
    case ParameterId::gamma_perp:
        return {1e-3, 1e3};
    case ParameterId::kappa:
        return {1e-1, 1e4};
    case ParameterId::eta_out:
        return {1e-6, 1.0};
    case ParameterId::cavity_ghz:
    case ParameterId::qd_ghz:
        return {-1e3, 1e3};
    case ParameterId::fss_ghz:
        return {-1e2, 1e2};
    case ParameterId::scale:
        return {1e-9, 1e9};
    }
    return {0.0, 0.0};
}

ScanModel scan_model_from_metadata(const SpectralScan &scan, const std::string &path)
{
    const auto get = [&](const std::string &key) -> std::string {
        const auto it = scan.metadata.find(key);
        if (it == scan.metadata.end())
        {
            throw UsageError(path + ": missing metadata '" + key + "'");
        }
        return it->second;
    };
    ScanModel model;
    model.system = system_model_from_string(get("system"));
    if (scan.kind == ScanKind::amplitude)
    {
        throw UsageError(path + ": amplitude scans cannot be fitted");
    }
    model.channel = scan.kind == ScanKind::transmittivity ? Channel::transmission : Channel::reflection;
    const Basis basis = parse_basis(get("pol_basis"));
    model.in = parse_state(get("theta_in"), basis, "theta_in");
    const std::string theta_out = get("theta_out");
    if (theta_out != "none")
    {
        model.out = parse_state(theta_out, basis, "theta_out");
    }
    return model;
}

int cmd_fit(const FitArgs &a, std::ostream &out, std::ostream &err)
{
    const io::Config cfg = io::read_config(a.config);
    FitProblem problem;
    for (const auto &path : a.data)
    {
        FitScan fs;
        fs.data = io::read_scan(path);
        fs.model = scan_model_from_metadata(fs.data, path);
        if (const auto it = fs.data.metadata.find("spin_up_population"); it != fs.data.metadata.end())
        {
            const double up = io::parse_number(it->second);
            fs.model.spin = SpinState{Complex(std::sqrt(up)), Complex(std::sqrt(1.0 - up))};
        }
        else if (fs.model.system == SystemModel::charged_m1 || fs.model.system == SystemModel::charged_m2)
        {
            fs.model.spin = cfg.spin();
        }
        problem.scans.push_back(std::move(fs));
    }
    problem.base = cfg.model_parameters(problem.scans.front().model.system);
    // Scan reference frequency wins over the config when both exist.
    problem.base.reference = problem.scans.front().data.grid.reference;
    for (const auto &s : problem.scans)
    {
        if (s.data.grid.reference != problem.base.reference)
        {
            throw UsageError("all data files must share one reference frequency");
        }
    }

    const std::vector<std::string> per_scan = split_list(a.per_scan);
    const std::vector<std::string> names = split_list(a.free);
    if (names.empty())
    {
        throw UsageError("--free needs at least one parameter");
    }
    for (const auto &name : names)
    {
        FreeParameter p;
        try
        {
            p.id = parameter_from_name(name);
        }
        catch (const DomainError &e)
        {
            throw UsageError(e.what());
        }
        const auto init = cfg.fit.initial.find(name);
        p.initial = init != cfg.fit.initial.end() ? init->second : problem.base[p.id];
        auto [lo, hi] = default_bounds(p.id);
        if (const auto b = cfg.fit.bounds.find(name); b != cfg.fit.bounds.end())
        {
            lo = b->second.first;
            hi = b->second.second;
        }
        p.lower = lo;
        p.upper = hi;
        p.shared = std::find(per_scan.begin(), per_scan.end(), name) == per_scan.end();
        problem.free.push_back(p);
    }
    for (const auto &name : per_scan)
    {
        if (std::find(names.begin(), names.end(), name) == names.end())
        {
            throw UsageError("--per-scan parameter '" + name + "' is not in --free");
        }
    }

    const FitResult result = fit(problem, cfg.fit.options);
    std::optional<DerivedQuantities> derived;
    if (result.convergence == Convergence::converged)
    {
        CavityParams cav = cfg.cavity();
        cav.omega_c = problem.base.reference + units::ghz_to_rad_per_ns(result.parameters.cavity_ghz);
        derived = derived_quantities(result, cav);
    }
    io::write_report(result, a.out, derived);

    out << "convergence: " << to_string(result.convergence) << " after " << result.iterations << " iterations\n";
    out << "residual_norm: " << fixed(result.residual_norm, 6) << "\n";
    for (const auto &e : result.estimates)
    {
        out << e.name << " = " << fixed(e.value, 6);
        if (e.uncertainty)
        {
            out << " +/- " << fixed(*e.uncertainty, 3);
        }
        out << (e.unit == "1" ? "" : " " + e.unit) << "\n";
    }
    if (derived)
    {
        out << "2g: " << fixed(derived->two_g, 4) << " 1/ns\n";
        out << "regime: " << to_string(derived->regime) << "\n";
        out << "Q: " << fixed(derived->quality_factor, 4) << "\n";
        out << "tau: " << fixed(derived->dephasing_time_ps, 4) << " ps\n";
        return kOk;
    }
    err << "fit did not converge (" << to_string(result.convergence) << "); best-so-far report written to " << a.out
        << "\n";
    return kDomainError;
}

int cmd_modes(const std::string &config, std::ostream &out)
{
    const io::Config cfg = io::read_config(config);
    const ModeGeometry geo = cfg.mode_geometry();
    const double volume = mode_volume(geo);
    out << "lambda_00: " << fixed(geo.lambda_00_nm, 6) << " nm\n";
    out << "delta_lambda_10: " << fixed(geo.delta_lambda_10_nm, 4) << " nm\n";
    out << "delta_lambda_01: " << fixed(geo.delta_lambda_01_nm, 4) << " nm\n";
    out << "V = " << fixed(volume, 3) << " um^3\n";
    out << "P = " << fixed(purcell_factor(geo, cfg.modes.quality_factor), 3) << " (Q = "
        << fixed(cfg.modes.quality_factor, 3) << ")\n";
    out << "w_x = " << fixed(mode_waist(geo, Axis::x), 4) << " um, w_y = " << fixed(mode_waist(geo, Axis::y), 4)
        << " um\n";
    out << "NA_x = " << fixed(numerical_aperture(geo, Axis::x), 3) << ", NA_y = "
        << fixed(numerical_aperture(geo, Axis::y), 3) << "\n";
    out << "mode-matchable with objective NA " << fixed(cfg.modes.objective_na, 3) << ": "
        << (mode_matchable(geo, cfg.modes.objective_na) ? "yes" : "no") << "\n";
    return kOk;
}

int cmd_loss(const std::string &config, std::ostream &out)
{
    const io::Config cfg = io::read_config(config);
    const LossBudget budget = loss_budget(cfg.mirror_spec(), cfg.measured_q, cfg.lambda_nm);
    const CavityParams &c = budget.cavity;
    out << "round trip: " << fixed(budget.round_trip_ns * 1e3, 5) << " ps\n";
    out << "kappa_m = " << fixed(c.kappa_m, 4) << " 1/ns\n";
    out << "kappa_s = " << fixed(c.kappa_s, 4) << " 1/ns\n";
    out << "kappa = " << fixed(c.kappa(), 4) << " 1/ns\n";
    out << "eta_out = " << fixed(c.eta_out(), 4) << "\n";
    out << "Q_ideal = " << fixed(budget.q_ideal, 4) << "\n";
    const CavityParams cav = cfg.cavity();
    const Complex t = transmission_amplitude(cav.omega_c, cav);
    out << "configured cavity: T_max = " << fixed(std::norm(t), 4) << ", R_min/R_max = " << fixed(std::norm(1.0 - t), 4)
        << "\n";
    return kOk;
}

int cmd_photon_number(const std::string &config, double power_pw, std::ostream &out)
{
    const io::Config cfg = io::read_config(config);
    const CavityParams cav = cfg.cavity();
    const Complex t = transmission_amplitude(cav.omega_c, cav);
    const double lambda = units::omega_to_wavelength_nm(cav.omega_c);
    const double n = mean_photon_number(power_pw, t, cav, lambda);
    constexpr double threshold = 1e-3;
    out << "<n> = " << fixed(n, 4) << " at P = " << fixed(power_pw, 4) << " pW\n";
    out << "<n> < " << fixed(threshold, 3) << ": " << (n < threshold ? "PASS" : "FAIL") << "\n";
    return kOk;
}

// ---------------------------------------------------------------------------
// Figures

struct FigureEntry
{
    std::string file;
    std::string role;
    SpectralScan scan;
};

std::string angle_token(double deg)
{
    std::string s = io::format_number(std::abs(deg));
    std::replace(s.begin(), s.end(), '.', 'p');
    return (deg < 0 ? "m" : "") + s;
}

int cmd_figure(const std::string &config, const std::string &which, const std::string &outdir,
               const std::string &grid_spec, std::ostream &out)
{
    static const std::vector<std::string> panels = {"2b", "2c", "2d", "3a", "3b", "4b", "4c", "4d", "4e"};
    if (std::find(panels.begin(), panels.end(), which) == panels.end())
    {
        throw UsageError("unknown panel '" + which + "'");
    }
    const io::Config cfg = io::read_config(config);
    const FrequencyGrid grid = parse_grid(grid_spec, cfg.reference_omega());
    const std::string prefix = "fig" + which;

    std::vector<FigureEntry> entries;
    const auto add = [&](const std::string &suffix, const std::string &role, SystemModel system, Channel channel,
                         const Polarizers &pol) {
        entries.push_back({prefix + "_" + suffix + ".csv", role, build_scan(cfg, system, channel, grid, pol)});
        entries.back().scan.metadata["panel"] = which;
    };
    const auto linear = [](double in, std::optional<double> out_deg) {
        Polarizers p;
        p.theta_in = io::format_number(in);
        if (out_deg)
        {
            p.theta_out = io::format_number(*out_deg);
        }
        return p;
    };
    const auto circular = [](const std::string &in, const std::string &out_state) {
        Polarizers p;
        p.basis = Basis::circular_pm;
        p.theta_in = in;
        p.theta_out = out_state;
        return p;
    };

    if (which == "2b" || which == "2c")
    {
        const Channel ch = which == "2b" ? Channel::reflection : Channel::transmission;
        for (double th : {0.0, 45.0, 90.0})
        {
            add("theta_in_" + angle_token(th), "model", SystemModel::neutral, ch, linear(th, std::nullopt));
        }
        add("empty", "empty-cavity", SystemModel::empty, ch, linear(0.0, std::nullopt));
    }
    else if (which == "2d")
    {
        for (double th : {0.0, 45.0, 90.0})
        {
            add("theta_in_" + angle_token(th), "model", SystemModel::neutral, Channel::transmission,
                linear(th, th + 90.0));
        }
        add("empty", "empty-cavity", SystemModel::empty, Channel::transmission, linear(0.0, std::nullopt));
        // Relative to the peak transmittivity of the uncoupled cavity.
        const double eta = cfg.cavity().eta_out();
        const double norm = eta * eta * cfg.eta_in * cfg.eta_t;
        for (auto &e : entries)
        {
            for (auto &v : e.scan.values)
            {
                v /= norm;
            }
            e.scan.metadata["normalization"] = "empty_cavity_peak";
        }
    }
    else if (which == "3a" || which == "3b")
    {
        const Channel ch = which == "3a" ? Channel::reflection : Channel::transmission;
        for (double d : {-45.0, -22.5, 0.0, 22.5, 45.0})
        {
            add("dtheta_" + angle_token(d), "model", SystemModel::neutral, ch, linear(45.0, 45.0 + 90.0 + d));
            entries.back().scan.metadata["delta_theta_out"] = io::format_number(d);
        }
        add("empty", "empty-cavity", SystemModel::empty, ch, linear(45.0, std::nullopt));
    }
    else if (which == "4b")
    {
        add("m1", "model", SystemModel::charged_m1, Channel::transmission, circular("+", "+"));
        add("m2", "model", SystemModel::charged_m2, Channel::transmission, circular("+", "+"));
        add("empty", "empty-cavity", SystemModel::empty, Channel::transmission, circular("+", "+"));
    }
    else if (which == "4c")
    {
        add("m1", "model", SystemModel::charged_m1, Channel::transmission, linear(0.0, 0.0));
        add("m2", "model", SystemModel::charged_m2, Channel::transmission, linear(0.0, 0.0));
        add("empty", "empty-cavity", SystemModel::empty, Channel::transmission, linear(0.0, 0.0));
    }
    else if (which == "4d")
    {
        // Both models coincide for circular input.
        add("sigma_plus", "model", SystemModel::charged_m1, Channel::transmission, circular("+", "-"));
        add("sigma_minus", "model", SystemModel::charged_m1, Channel::transmission, circular("-", "+"));
        add("empty", "empty-cavity", SystemModel::empty, Channel::transmission, circular("+", "+"));
    }
    else if (which == "4e")
    {
        add("lin1_m1", "model", SystemModel::charged_m1, Channel::transmission, linear(0.0, 90.0));
        add("lin1_m2", "model", SystemModel::charged_m2, Channel::transmission, linear(0.0, 90.0));
        add("lin2_m1", "model", SystemModel::charged_m1, Channel::transmission, linear(90.0, 0.0));
        add("lin2_m2", "model", SystemModel::charged_m2, Channel::transmission, linear(90.0, 0.0));
        add("empty", "empty-cavity", SystemModel::empty, Channel::transmission, linear(0.0, 0.0));
    }

    fs::create_directories(outdir);
    std::string manifest = "# panel=" + which + "\n# file\trole\tsystem\tchannel\tpol_basis\ttheta_in\ttheta_out\n";
    for (const auto &e : entries)
    {
        io::write_scan(e.scan, fs::path(outdir) / e.file);
        const auto &m = e.scan.metadata;
        manifest += e.file + "\t" + e.role + "\t" + m.at("system") + "\t" + m.at("channel") + "\t" + m.at("pol_basis") +
                    "\t" + m.at("theta_in") + "\t" + m.at("theta_out") + "\n";
    }
    manifest += "# measured data curves are not bundled\n";
    io::write_file_atomic(fs::path(outdir) / (prefix + "_manifest.txt"), manifest);
    out << "wrote " << entries.size() << " scans and " << prefix << "_manifest.txt to " << outdir << "\n";
    return kOk;
}

} // namespace

std::vector<Extremum> local_maxima(const SpectralScan &scan)
{
    return extrema(scan, true);
}

std::vector<Extremum> local_minima(const SpectralScan &scan)
{
    return extrema(scan, false);
}

int run(int argc, const char *const argv[], std::ostream &out, std::ostream &err)
{
    CLI::App app{"Polarization-resolved cavity QED spectra of quantum dots in micropillars", "qdcavity"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    SpectrumArgs sa;
    auto *spectrum = app.add_subcommand("spectrum", "Compute a polarization-resolved spectrum");
    spectrum->add_option("config", sa.config, "Config JSON")->required()->check(CLI::ExistingFile);
    spectrum->add_option("--system", sa.system, "empty, neutral, charged-m1 or charged-m2")
        ->required()
        ->check(CLI::IsMember({"empty", "neutral", "charged-m1", "charged-m2"}));
    spectrum->add_option("--channel", sa.channel, "T (transmission) or R (reflection)")
        ->check(CLI::IsMember({"T", "R"}))
        ->capture_default_str();
    spectrum->add_option("--pol-basis", sa.basis, "linear or circular")
        ->check(CLI::IsMember({"linear", "circular"}))
        ->capture_default_str();
    spectrum->add_option("--theta-in", sa.theta_in, "Input polarization: degrees (linear) or +/- (circular)")
        ->capture_default_str();
    auto *theta_out = spectrum->add_option("--theta-out", sa.theta_out, "Analyzer: degrees (linear) or +/- (circular)");
    auto *no_analyzer = spectrum->add_flag("--no-analyzer", sa.no_analyzer, "No output polarizer (default)");
    theta_out->excludes(no_analyzer);
    spectrum->add_option("--grid", sa.grid, "start:stop:points, GHz detuning from the reference")
        ->capture_default_str();
    spectrum->add_option("--out", sa.out, "Output scan CSV")->required();

    FitArgs fa;
    auto *fitcmd = app.add_subcommand("fit", "Fit model parameters to one or more scans");
    fitcmd->add_option("config", fa.config, "Config JSON")->required()->check(CLI::ExistingFile);
    fitcmd->add_option("--data", fa.data, "Scan CSV files")->required()->check(CLI::ExistingFile);
    fitcmd->add_option("--free", fa.free, "Comma-separated free parameters (C, gamma_perp, kappa, eta_out, "
                                          "cavity_ghz, qd_ghz, fss_ghz, scale)")
        ->required();
    fitcmd->add_option("--per-scan", fa.per_scan, "Free parameters fitted separately for every scan");
    fitcmd->add_option("--out", fa.out, "Report JSON")->required();

    std::string modes_config;
    auto *modes = app.add_subcommand("modes", "Mode volume, Purcell factor and numerical apertures");
    modes->add_option("config", modes_config, "Config JSON")->required()->check(CLI::ExistingFile);

    std::string loss_config;
    auto *loss = app.add_subcommand("loss", "Split the measured Q into mirror and scattering losses");
    loss->add_option("config", loss_config, "Config JSON")->required()->check(CLI::ExistingFile);

    std::string photon_config;
    double power_pw = 10.0;
    auto *photon = app.add_subcommand("photon-number", "Mean intracavity photon number at the cavity resonance");
    photon->add_option("config", photon_config, "Config JSON")->required()->check(CLI::ExistingFile);
    photon->add_option("--power", power_pw, "Laser power in pW")->check(CLI::NonNegativeNumber)->capture_default_str();

    std::string figure_config, which, outdir, figure_grid = "-20:20:401";
    auto *figure = app.add_subcommand("figure", "Emit every curve of one reference figure panel");
    figure->add_option("config", figure_config, "Config JSON")->required()->check(CLI::ExistingFile);
    figure->add_option("--which", which, "2b, 2c, 2d, 3a, 3b, 4b, 4c, 4d or 4e")->required();
    figure->add_option("--outdir", outdir, "Output directory")->required();
    figure->add_option("--grid", figure_grid, "start:stop:points, GHz detuning from the reference")
        ->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try
    {
        if (*spectrum)
            return cmd_spectrum(sa, out);
        if (*fitcmd)
            return cmd_fit(fa, out, err);
        if (*modes)
            return cmd_modes(modes_config, out);
        if (*loss)
            return cmd_loss(loss_config, out);
        if (*photon)
            return cmd_photon_number(photon_config, power_pw, out);
        if (*figure)
            return cmd_figure(figure_config, which, outdir, figure_grid, out);
    }
    catch (const UsageError &e)
    {
        err << "usage error: " << e.what() << "\n";
        return kUsageError;
    }
    catch (const ParseError &e)
    {
        err << "input error: " << e.what() << "\n";
        return kUsageError;
    }
    catch (const DomainError &e)
    {
        err << "error: " << e.what() << "\n";
        return kDomainError;
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << "\n";
        return kDomainError;
    }
    return kUsageError;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    std::vector<const char *> argv;
    argv.reserve(args.size());
    for (const auto &a : args)
    {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace qdcavity::cli

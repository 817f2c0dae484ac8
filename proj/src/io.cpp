#include "qdcavity/io.hpp"

#include "qdcavity/errors.hpp"
#include "qdcavity/units.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

namespace qdcavity::io
{

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double value)
{
    if (value == 0.0)
    {
        return "0";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

double parse_number(const std::string &text)
{
    const char *first = text.data();
    const char *last = text.data() + text.size();
    if (first != last && *first == '+')
    {
        ++first;
    }
    double value = 0.0;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || first == last)
    {
        throw ParseError("not a number: '" + text + "'");
    }
    if (!std::isfinite(value))
    {
        throw ParseError("non-finite number: '" + text + "'");
    }
    return value;
}

std::string read_file(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path &path, const std::string &contents)
{
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
        {
            throw IoError("cannot open '" + tmp.string() + "' for writing");
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out)
        {
            throw IoError("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
    {
        fs::remove(tmp, ec);
        throw IoError("cannot rename onto '" + path.string() + "'");
    }
}

// ---------------------------------------------------------------------------
// Scans

namespace
{
std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos)
    {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string &line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ','))
    {
        fields.push_back(trim(field));
    }
    if (!line.empty() && line.back() == ',')
    {
        fields.emplace_back();
    }
    return fields;
}
} // namespace

SpectralScan parse_scan(const std::string &text)
{
    SpectralScan scan;
    std::optional<std::vector<std::string>> header;
    std::vector<double> freqs_ghz;
    std::size_t line_no = 0;
    std::istringstream in(text);
    std::string line;
    std::optional<ScanKind> kind;
    double reference_ghz = 0.0;

    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
        {
            line.pop_back();
        }
        if (trim(line).empty())
        {
            continue;
        }
        if (line[0] == '#')
        {
            const std::string body = trim(line.substr(1));
            const auto eq = body.find('=');
            if (eq == std::string::npos)
            {
                throw ParseError("metadata line without '='", line_no);
            }
            const std::string key = trim(body.substr(0, eq));
            const std::string value = trim(body.substr(eq + 1));
            try
            {
                if (key == "kind")
                {
                    kind = scan_kind_from_string(value);
                }
                else if (key == "reference_ghz")
                {
                    reference_ghz = parse_number(value);
                }
                else
                {
                    scan.metadata[key] = value;
                }
            }
            catch (const std::exception &e)
            {
                throw ParseError(e.what(), line_no);
            }
            continue;
        }

        auto fields = split_csv(line);
        if (!header)
        {
            const bool real = fields == std::vector<std::string>{"frequency_ghz", "value"};
            const bool cplx = fields == std::vector<std::string>{"frequency_ghz", "re", "im"};
            if (!real && !cplx)
            {
                throw ParseError("expected header 'frequency_ghz,value' or 'frequency_ghz,re,im'", line_no);
            }
            header = fields;
            continue;
        }
        if (fields.size() != header->size())
        {
            throw ParseError("expected " + std::to_string(header->size()) + " columns, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        double f = 0.0, re = 0.0, im = 0.0;
        try
        {
            f = parse_number(fields[0]);
            re = parse_number(fields[1]);
            if (fields.size() == 3)
            {
                im = parse_number(fields[2]);
            }
        }
        catch (const ParseError &e)
        {
            throw ParseError(e.what(), line_no);
        }
        if (!freqs_ghz.empty() && !(f > freqs_ghz.back()))
        {
            throw ParseError("frequencies must be strictly increasing", line_no);
        }
        freqs_ghz.push_back(f);
        scan.values.emplace_back(re, im);
    }

    if (!header)
    {
        throw ParseError("missing header line");
    }
    const bool amplitude = header->size() == 3;
    scan.kind = kind.value_or(amplitude ? ScanKind::amplitude : ScanKind::transmittivity);
    if (amplitude != (scan.kind == ScanKind::amplitude))
    {
        throw ParseError("kind '" + to_string(scan.kind) + "' does not match the column layout");
    }
    scan.grid.reference = units::ghz_to_rad_per_ns(reference_ghz);
    scan.grid.offsets.reserve(freqs_ghz.size());
    for (double f : freqs_ghz)
    {
        scan.grid.offsets.push_back(units::ghz_to_rad_per_ns(f));
    }
    try
    {
        scan.validate();
    }
    catch (const DomainError &e)
    {
        throw ParseError(e.what());
    }
    return scan;
}

SpectralScan read_scan(const fs::path &path)
{
    try
    {
        return parse_scan(read_file(path));
    }
    catch (const ParseError &e)
    {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string format_scan(const SpectralScan &scan)
{
    scan.validate();
    std::map<std::string, std::string> meta = scan.metadata;
    meta["kind"] = to_string(scan.kind);
    meta["reference_ghz"] = format_number(units::rad_per_ns_to_ghz(scan.grid.reference));

    std::string out;
    for (const auto &[key, value] : meta)
    {
        if (key.empty() || key.find_first_of("=\n\r") != std::string::npos || value.find_first_of("\n\r") != std::string::npos)
        {
            throw DomainError("metadata entry '" + key + "' cannot be serialized");
        }
        out += "# " + key + "=" + value + "\n";
    }
    const bool amplitude = scan.kind == ScanKind::amplitude;
    out += amplitude ? "frequency_ghz,re,im\n" : "frequency_ghz,value\n";
    for (std::size_t i = 0; i < scan.size(); ++i)
    {
        out += format_number(units::rad_per_ns_to_ghz(scan.grid.offsets[i]));
        out += ',';
        out += format_number(scan.values[i].real());
        if (amplitude)
        {
            out += ',';
            out += format_number(scan.values[i].imag());
        }
        out += '\n';
    }
    return out;
}

void write_scan(const SpectralScan &scan, const fs::path &path)
{
    write_file_atomic(path, format_scan(scan));
}

// ---------------------------------------------------------------------------
// Reports

namespace
{
double round12(double v)
{
    return parse_number(format_number(v));
}
} // namespace

std::string format_report(const FitResult &result, const std::optional<DerivedQuantities> &derived)
{
    json report;
    report["convergence"] = to_string(result.convergence);
    report["iterations"] = result.iterations;
    report["residual_norm"] = round12(result.residual_norm);
    json estimates = json::object();
    for (const auto &e : result.estimates)
    {
        json entry;
        entry["unit"] = e.unit;
        entry["value"] = round12(e.value);
        entry["uncertainty"] = e.uncertainty ? json(round12(*e.uncertainty)) : json(nullptr);
        estimates[e.name] = entry;
    }
    report["estimates"] = estimates;
    if (derived)
    {
        report["derived"] = {
            {"cooperativity", round12(derived->cooperativity)},
            {"gamma_perp_ns_inv", round12(derived->gamma_perp)},
            {"kappa_ns_inv", round12(derived->kappa)},
            {"g_ns_inv", round12(derived->g)},
            {"two_g_ns_inv", round12(derived->two_g)},
            {"regime", to_string(derived->regime)},
            {"quality_factor", round12(derived->quality_factor)},
            {"dephasing_time_ps", round12(derived->dephasing_time_ps)},
        };
    }
    return report.dump(2) + "\n";
}

void write_report(const FitResult &result, const fs::path &path, const std::optional<DerivedQuantities> &derived)
{
    write_file_atomic(path, format_report(result, derived));
}

// ---------------------------------------------------------------------------
// Config

namespace
{
void reject_unknown(const json &obj, const std::set<std::string> &allowed, const std::string &where)
{
    if (!obj.is_object())
    {
        throw ParseError("'" + where + "' must be a JSON object");
    }
    for (const auto &[key, _] : obj.items())
    {
        if (!allowed.count(key))
        {
            throw ParseError("unknown key '" + key + "' in " + where);
        }
    }
}

void read_number(const json &obj, const char *key, double &target)
{
    if (!obj.contains(key))
    {
        return;
    }
    const json &v = obj.at(key);
    if (!v.is_number())
    {
        throw ParseError(std::string("'") + key + "' must be a number");
    }
    target = v.get<double>();
}

void read_number(const json &obj, const char *key, std::optional<double> &target)
{
    if (obj.contains(key))
    {
        double v = 0.0;
        read_number(obj, key, v);
        target = v;
    }
}
} // namespace

Config parse_config(const std::string &json_text)
{
    json doc;
    try
    {
        doc = json::parse(json_text);
    }
    catch (const json::parse_error &e)
    {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    reject_unknown(doc, {"cavity", "neutral_qd", "charged_qd", "modes", "fit"}, "config");

    Config cfg;
    if (doc.contains("cavity"))
    {
        const json &c = doc["cavity"];
        reject_unknown(c,
                       {"lambda_nm", "detuning_ghz", "kappa_m_ns_inv", "kappa_s_ns_inv", "eta_in", "eta_r", "eta_t",
                        "mirror", "measured_q"},
                       "cavity");
        read_number(c, "lambda_nm", cfg.lambda_nm);
        read_number(c, "detuning_ghz", cfg.cavity_detuning_ghz);
        read_number(c, "kappa_m_ns_inv", cfg.kappa_m_ns_inv);
        read_number(c, "kappa_s_ns_inv", cfg.kappa_s_ns_inv);
        read_number(c, "eta_in", cfg.eta_in);
        read_number(c, "eta_r", cfg.eta_r);
        read_number(c, "eta_t", cfg.eta_t);
        read_number(c, "measured_q", cfg.measured_q);
        if (c.contains("mirror"))
        {
            const json &m = c["mirror"];
            reject_unknown(m, {"t_mirror", "n_avg", "l_cav_um"}, "cavity.mirror");
            read_number(m, "t_mirror", cfg.mirror.t_mirror);
            read_number(m, "n_avg", cfg.mirror.n_avg);
            read_number(m, "l_cav_um", cfg.mirror.l_cav_um);
        }
    }
    if (doc.contains("neutral_qd"))
    {
        const json &n = doc["neutral_qd"];
        reject_unknown(n,
                       {"cooperativity", "gamma_perp_ns_inv", "center_detuning_ghz", "fss_ghz", "cavity_offset_y_ghz",
                        "cooperativity_x", "cooperativity_y", "gamma_perp_x_ns_inv", "gamma_perp_y_ns_inv"},
                       "neutral_qd");
        auto &q = cfg.neutral;
        read_number(n, "cooperativity", q.cooperativity);
        read_number(n, "gamma_perp_ns_inv", q.gamma_perp_ns_inv);
        read_number(n, "center_detuning_ghz", q.center_detuning_ghz);
        read_number(n, "fss_ghz", q.fss_ghz);
        read_number(n, "cavity_offset_y_ghz", q.cavity_offset_y_ghz);
        read_number(n, "cooperativity_x", q.cooperativity_x);
        read_number(n, "cooperativity_y", q.cooperativity_y);
        read_number(n, "gamma_perp_x_ns_inv", q.gamma_perp_x_ns_inv);
        read_number(n, "gamma_perp_y_ns_inv", q.gamma_perp_y_ns_inv);
    }
    if (doc.contains("charged_qd"))
    {
        const json &n = doc["charged_qd"];
        reject_unknown(n, {"cooperativity", "gamma_perp_ns_inv", "detuning_ghz", "spin_up_population"}, "charged_qd");
        auto &q = cfg.charged;
        read_number(n, "cooperativity", q.cooperativity);
        read_number(n, "gamma_perp_ns_inv", q.gamma_perp_ns_inv);
        read_number(n, "detuning_ghz", q.detuning_ghz);
        read_number(n, "spin_up_population", q.spin_up_population);
    }
    if (doc.contains("modes"))
    {
        const json &m = doc["modes"];
        reject_unknown(m,
                       {"lambda_00_nm", "n0", "l_cav_um", "delta_lambda_10_nm", "delta_lambda_01_nm", "na_x", "na_y",
                        "quality_factor", "objective_na"},
                       "modes");
        auto &q = cfg.modes;
        read_number(m, "lambda_00_nm", q.lambda_00_nm);
        read_number(m, "n0", q.n0);
        read_number(m, "l_cav_um", q.l_cav_um);
        read_number(m, "delta_lambda_10_nm", q.delta_lambda_10_nm);
        read_number(m, "delta_lambda_01_nm", q.delta_lambda_01_nm);
        read_number(m, "na_x", q.na_x);
        read_number(m, "na_y", q.na_y);
        read_number(m, "quality_factor", q.quality_factor);
        read_number(m, "objective_na", q.objective_na);
    }
    if (doc.contains("fit"))
    {
        const json &f = doc["fit"];
        reject_unknown(f, {"max_iter", "tolerance", "initial_damping", "bounds", "initial"}, "fit");
        if (f.contains("max_iter"))
        {
            if (!f["max_iter"].is_number_integer())
            {
                throw ParseError("'max_iter' must be an integer");
            }
            cfg.fit.options.max_iter = f["max_iter"].get<int>();
        }
        read_number(f, "tolerance", cfg.fit.options.tolerance);
        read_number(f, "initial_damping", cfg.fit.options.initial_damping);
        const auto require_parameter = [](const std::string &name) {
            try
            {
                parameter_from_name(name);
            }
            catch (const DomainError &e)
            {
                throw ParseError(e.what());
            }
        };
        if (f.contains("bounds"))
        {
            if (!f["bounds"].is_object())
            {
                throw ParseError("'fit.bounds' must be an object");
            }
            for (const auto &[name, b] : f["bounds"].items())
            {
                require_parameter(name);
                if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
                {
                    throw ParseError("bounds for '" + name + "' must be [lower, upper]");
                }
                cfg.fit.bounds[name] = {b[0].get<double>(), b[1].get<double>()};
            }
        }
        if (f.contains("initial"))
        {
            if (!f["initial"].is_object())
            {
                throw ParseError("'fit.initial' must be an object");
            }
            for (const auto &[name, v] : f["initial"].items())
            {
                require_parameter(name);
                if (!v.is_number())
                {
                    throw ParseError("initial value for '" + name + "' must be a number");
                }
                cfg.fit.initial[name] = v.get<double>();
            }
        }
    }

    // Surface physical inconsistencies at load time.
    cfg.cavity().validate();
    if (cfg.charged.spin_up_population < 0.0 || cfg.charged.spin_up_population > 1.0)
    {
        throw DomainError("spin_up_population must lie in [0, 1]");
    }
    return cfg;
}

Config read_config(const fs::path &path)
{
    try
    {
        return parse_config(read_file(path));
    }
    catch (const ParseError &e)
    {
        throw ParseError(path.string() + ": " + e.what());
    }
}

double Config::reference_omega() const
{
    return units::wavelength_nm_to_omega(lambda_nm);
}

CavityParams Config::cavity() const
{
    CavityParams cav;
    cav.omega_c = reference_omega() + units::ghz_to_rad_per_ns(cavity_detuning_ghz);
    cav.kappa_m = kappa_m_ns_inv;
    cav.kappa_s = kappa_s_ns_inv;
    cav.eta_in = eta_in;
    cav.eta_R = eta_r;
    cav.eta_T = eta_t;
    cav.validate();
    return cav;
}

MirrorSpec Config::mirror_spec() const
{
    MirrorSpec m = mirror;
    if (m.l_cav_um == 0.0)
    {
        m.l_cav_um = 5.0 * lambda_nm / m.n_avg / 1e3;
    }
    m.validate();
    return m;
}

NeutralQdSystem Config::neutral_system() const
{
    const CavityParams cav = cavity();
    const double center = reference_omega() + units::ghz_to_rad_per_ns(neutral.center_detuning_ghz);
    const double half = 0.5 * units::ghz_to_rad_per_ns(neutral.fss_ghz);
    NeutralQdSystem sys;
    sys.cavity = cav;
    sys.qd_x = QdTransition::from_cooperativity(center - half, neutral.gamma_perp_x_ns_inv.value_or(neutral.gamma_perp_ns_inv),
                                                neutral.cooperativity_x.value_or(neutral.cooperativity), cav);
    sys.qd_y = QdTransition::from_cooperativity(center + half, neutral.gamma_perp_y_ns_inv.value_or(neutral.gamma_perp_ns_inv),
                                                neutral.cooperativity_y.value_or(neutral.cooperativity), cav);
    sys.cavity_offset_y = units::ghz_to_rad_per_ns(neutral.cavity_offset_y_ghz);
    sys.validate();
    return sys;
}

ChargedQdSystem Config::charged_system() const
{
    const CavityParams cav = cavity();
    ChargedQdSystem sys{cav, QdTransition::from_cooperativity(
                                 reference_omega() + units::ghz_to_rad_per_ns(charged.detuning_ghz),
                                 charged.gamma_perp_ns_inv, charged.cooperativity, cav)};
    sys.validate();
    return sys;
}

SpinState Config::spin() const
{
    if (charged.spin_up_population == 0.5)
    {
        return SpinState::balanced();
    }
    return {Complex(std::sqrt(charged.spin_up_population), 0.0),
            Complex(std::sqrt(1.0 - charged.spin_up_population), 0.0)};
}

ModeGeometry Config::mode_geometry() const
{
    const double l_cav = modes.l_cav_um.value_or(5.0 * modes.lambda_00_nm / modes.n0 / 1e3);
    ModeGeometry geo = ModeGeometry::from_numerical_apertures(modes.lambda_00_nm, modes.n0, l_cav, modes.na_x, modes.na_y);
    if (modes.delta_lambda_10_nm)
    {
        geo.delta_lambda_10_nm = *modes.delta_lambda_10_nm;
    }
    if (modes.delta_lambda_01_nm)
    {
        geo.delta_lambda_01_nm = *modes.delta_lambda_01_nm;
    }
    geo.validate();
    return geo;
}

ModelParameters Config::model_parameters(SystemModel system) const
{
    const CavityParams cav = cavity();
    ModelParameters p;
    p.reference = reference_omega();
    p.kappa = cav.kappa();
    p.eta_out = cav.eta_out();
    p.cavity_ghz = cavity_detuning_ghz;
    p.scale = 1.0;
    p.eta_in = cav.eta_in;
    p.eta_R = cav.eta_R;
    p.eta_T = cav.eta_T;
    if (system == SystemModel::charged_m1 || system == SystemModel::charged_m2)
    {
        p.cooperativity = charged.cooperativity;
        p.gamma_perp = charged.gamma_perp_ns_inv;
        p.qd_ghz = charged.detuning_ghz;
    }
    else
    {
        p.cooperativity = neutral.cooperativity;
        p.gamma_perp = neutral.gamma_perp_ns_inv;
        p.qd_ghz = neutral.center_detuning_ghz;
        p.fss_ghz = neutral.fss_ghz;
    }
    return p;
}

} // namespace qdcavity::io

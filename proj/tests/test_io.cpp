#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qdcavity/errors.hpp"
#include "qdcavity/io.hpp"
#include "qdcavity/units.hpp"

#include <json.hpp>

#include <clocale>
#include <cmath>
#include <filesystem>
#include <random>

using namespace qdcavity;
namespace fs = std::filesystem;

namespace
{

fs::path temp_dir()
{
    const fs::path dir = fs::temp_directory_path() / "qdcavity_test_io";
    fs::create_directories(dir);
    return dir;
}

SpectralScan sample_scan()
{
    SpectralScan scan;
    scan.kind = ScanKind::reflectivity;
    scan.grid = FrequencyGrid::linspace_ghz(units::wavelength_nm_to_omega(940.0), -3.0, 3.0, 7);
    for (std::size_t i = 0; i < scan.size(); ++i)
        scan.values.emplace_back(0.1 + 0.123456789012345 * static_cast<double>(i), 0.0);
    scan.metadata["theta_in"] = "45";
    return scan;
}

} // namespace

TEST_CASE("number formatting")
{
    CHECK(io::format_number(0.0) == "0");
    CHECK(io::format_number(-0.0) == "0");
    CHECK(io::format_number(1.5) == "1.5");
    CHECK(io::format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(io::format_number(1e-20) == "1e-20");
    CHECK(io::format_number(-2.5e6) == "-2500000");
    CHECK(io::parse_number("1.25") == 1.25);
    CHECK(io::parse_number("+3") == 3.0);
    CHECK(io::parse_number("-1e-3") == -1e-3);
    CHECK_THROWS_AS(io::parse_number("1,5"), ParseError);
    CHECK_THROWS_AS(io::parse_number(""), ParseError);
    CHECK_THROWS_AS(io::parse_number("nan"), ParseError);
    CHECK_THROWS_AS(io::parse_number("1.0x"), ParseError);
}

TEST_CASE("formatting ignores the global locale")
{
    const char *previous = std::setlocale(LC_NUMERIC, nullptr);
    const std::string saved = previous ? previous : "C";
    if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8") || std::setlocale(LC_NUMERIC, "fr_FR.UTF-8"))
    {
        CHECK(io::format_number(1.5) == "1.5");
        CHECK(io::parse_number("2.25") == 2.25);
    }
    std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST_CASE("minimal scan files")
{
    const SpectralScan two = io::parse_scan("frequency_ghz,value\n-1,0.5\n1,0.25\n");
    CHECK(two.size() == 2);
    CHECK(two.kind == ScanKind::transmittivity);
    CHECK(two.grid.reference == 0.0);
    CHECK(two.grid.offsets[1] == doctest::Approx(units::ghz_to_rad_per_ns(1.0)));

    const SpectralScan amp = io::parse_scan("# reference_ghz=1000\nfrequency_ghz,re,im\n0,0.1,-0.2\n0.5,0.3,0.4\n");
    CHECK(amp.kind == ScanKind::amplitude);
    CHECK(amp.values[0] == Complex(0.1, -0.2));
    CHECK(amp.grid.reference == doctest::Approx(units::ghz_to_rad_per_ns(1000.0)));

    const SpectralScan crlf = io::parse_scan("# kind=reflectivity\r\nfrequency_ghz,value\r\n0,1\r\n1,0.5\r\n");
    CHECK(crlf.kind == ScanKind::reflectivity);
}

TEST_CASE("malformed scans report the line")
{
    const auto line_of = [](const std::string &text) -> long {
        try
        {
            io::parse_scan(text);
        }
        catch (const ParseError &e)
        {
            return static_cast<long>(e.line());
        }
        return -1;
    };
    CHECK(line_of("frequency_ghz,value\n2,0.5\n1,0.25\n") == 3);
    CHECK(line_of("frequency_ghz,value\n1,0.5\n1,0.25\n") == 3);
    CHECK(line_of("# kind=transmittivity\nfrequency_ghz,value\n0,0.1\n1,abc\n") == 4);
    CHECK(line_of("frequency_ghz,value\n0,0.1,0.2\n") == 2);
    CHECK(line_of("freq,value\n0,1\n") == 1);
    CHECK(line_of("# kind=phase\nfrequency_ghz,value\n0,1\n1,1\n") == 1);
    CHECK(line_of("# nonsense\n") == 1);
    CHECK_THROWS_AS(io::parse_scan("frequency_ghz,value\n0,1\n"), ParseError);
    CHECK_THROWS_AS(io::parse_scan("frequency_ghz,value\n0,-1\n1,1\n"), ParseError);
    CHECK_THROWS_AS(io::parse_scan("# kind=amplitude\nfrequency_ghz,value\n0,1\n1,1\n"), ParseError);
    CHECK_THROWS_AS(io::parse_scan(""), ParseError);
}

TEST_CASE("scan format is canonical")
{
    const SpectralScan scan = sample_scan();
    const std::string text = io::format_scan(scan);
    CHECK(text.rfind("# kind=reflectivity\n# reference_ghz=", 0) == 0);
    CHECK(text.find("# theta_in=45\nfrequency_ghz,value\n-3,0.1\n") != std::string::npos);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.back() == '\n');
    CHECK(io::format_scan(scan) == text);

    SpectralScan amp = scan;
    amp.kind = ScanKind::amplitude;
    amp.values[2] = Complex(-0.25, 1e-3);
    const std::string amp_text = io::format_scan(amp);
    CHECK(amp_text.find("frequency_ghz,re,im\n") != std::string::npos);
    CHECK(amp_text.find("\n-1,-0.25,0.001\n") != std::string::npos);
}

TEST_CASE("scan round trip keeps 12 significant digits")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SpectralScan scan;
    scan.kind = ScanKind::amplitude;
    scan.grid.reference = units::wavelength_nm_to_omega(940.0);
    double f = -5.0;
    for (int i = 0; i < 300; ++i)
    {
        f += 1e-3 + u(rng);
        scan.grid.offsets.push_back(units::ghz_to_rad_per_ns(f));
        scan.values.emplace_back(u(rng) * std::pow(10.0, -8.0 * u(rng)), -u(rng));
    }
    scan.metadata["note"] = "synthetic";
    const SpectralScan back = io::parse_scan(io::format_scan(scan));
    REQUIRE(back.size() == scan.size());
    CHECK(back.kind == scan.kind);
    CHECK(back.metadata == scan.metadata);
    CHECK(back.grid.reference == doctest::Approx(scan.grid.reference).epsilon(5e-12));
    for (std::size_t i = 0; i < scan.size(); ++i)
    {
        CHECK(back.grid.offsets[i] == doctest::Approx(scan.grid.offsets[i]).epsilon(5e-12));
        CHECK(back.values[i].real() == doctest::Approx(scan.values[i].real()).epsilon(5e-12));
        CHECK(back.values[i].imag() == doctest::Approx(scan.values[i].imag()).epsilon(5e-12));
    }
    // A second pass is exact.
    CHECK(io::format_scan(back) == io::format_scan(io::parse_scan(io::format_scan(back))));
}

TEST_CASE("files are written atomically and byte-identically")
{
    const fs::path dir = temp_dir();
    const fs::path path = dir / "scan.csv";
    const SpectralScan scan = sample_scan();
    io::write_scan(scan, path);
    const std::string first = io::read_file(path);
    io::write_scan(scan, path);
    CHECK(io::read_file(path) == first);
    for (const auto &entry : fs::directory_iterator(dir))
        CHECK(entry.path().filename().string().find(".tmp") == std::string::npos);
    CHECK(io::read_scan(path).size() == scan.size());
    CHECK_THROWS_AS(io::read_scan(dir / "missing.csv"), IoError);
    CHECK_THROWS_AS(io::write_scan(scan, dir / "no_such_dir" / "x.csv"), IoError);
}

TEST_CASE("fit report")
{
    FitResult r;
    r.convergence = Convergence::converged;
    r.iterations = 7;
    r.residual_norm = 0.012345678901234;
    r.estimates.push_back({"gamma_perp", "1/ns", 2.0, 0.1});
    r.estimates.push_back({"C", "1", 2.5, std::nullopt});
    const std::string text = io::format_report(r);
    const auto doc = nlohmann::json::parse(text);
    CHECK(doc["convergence"] == "converged");
    CHECK(doc["iterations"] == 7);
    CHECK(doc["residual_norm"].get<double>() == doctest::Approx(0.0123456789012).epsilon(5e-12));
    CHECK(doc["estimates"]["C"]["uncertainty"].is_null());
    CHECK(doc["estimates"]["gamma_perp"]["uncertainty"] == 0.1);
    CHECK(doc["estimates"]["gamma_perp"]["unit"] == "1/ns");
    CHECK(text.find("\"C\"") < text.find("\"gamma_perp\""));
    CHECK(text.find("\"convergence\"") < text.find("\"estimates\""));
    CHECK(text.back() == '\n');
    CHECK(io::format_report(r) == text);

    DerivedQuantities d;
    d.two_g = 39.2;
    d.regime = CouplingRegime::intermediate;
    const auto with = nlohmann::json::parse(io::format_report(r, d));
    CHECK(with["derived"]["regime"] == "intermediate");
    CHECK(with["derived"]["two_g_ns_inv"] == 39.2);
}

TEST_CASE("config defaults")
{
    const io::Config cfg = io::parse_config("{}");
    const CavityParams cav = cfg.cavity();
    CHECK(cav.kappa_m == 11.0);
    CHECK(cav.kappa_s == 55.0);
    CHECK(cav.omega_c == doctest::Approx(units::wavelength_nm_to_omega(940.0)));
    const NeutralQdSystem n = cfg.neutral_system();
    CHECK(n.fss_ghz() == doctest::Approx(3.0));
    CHECK(n.qd_x.cooperativity(cav) == doctest::Approx(2.5));
    CHECK(n.qd_x.gamma_perp == 2.0);
    const ChargedQdSystem c = cfg.charged_system();
    CHECK(c.trion.cooperativity(cav) == doctest::Approx(0.13));
    CHECK(c.trion.gamma_perp == 9.5);
    CHECK(std::norm(cfg.spin().alpha) == doctest::Approx(0.5));
    const ModeGeometry g = cfg.mode_geometry();
    CHECK(g.l_cav_um == doctest::Approx(5.0 * 0.94048 / 3.25));
    CHECK(cfg.mirror_spec().l_cav_um == doctest::Approx(5.0 * 0.940 / 3.25));
    const ModelParameters p = cfg.model_parameters(SystemModel::neutral);
    CHECK(p.cooperativity == 2.5);
    CHECK(p.kappa == 77.0);
    CHECK(p.fss_ghz == 3.0);
    CHECK(cfg.model_parameters(SystemModel::charged_m2).gamma_perp == 9.5);
}

TEST_CASE("config sections")
{
    const io::Config cfg = io::parse_config(R"({
      "cavity": {"lambda_nm": 930, "detuning_ghz": 2, "kappa_m_ns_inv": 10, "kappa_s_ns_inv": 40,
                 "eta_in": 0.8, "mirror": {"t_mirror": 1e-4}},
      "neutral_qd": {"fss_ghz": 5, "cooperativity_y": 1.0},
      "charged_qd": {"spin_up_population": 1.0},
      "modes": {"delta_lambda_10_nm": 2, "delta_lambda_01_nm": 2},
      "fit": {"max_iter": 50, "bounds": {"C": [0, 10]}, "initial": {"gamma_perp": 3}}
    })");
    const CavityParams cav = cfg.cavity();
    CHECK(cav.kappa() == 60.0);
    CHECK(cav.eta_in == 0.8);
    CHECK(cav.omega_c == doctest::Approx(units::wavelength_nm_to_omega(930.0) + units::ghz_to_rad_per_ns(2.0)));
    const NeutralQdSystem n = cfg.neutral_system();
    CHECK(n.fss_ghz() == doctest::Approx(5.0));
    CHECK(n.qd_y.cooperativity(cav) == doctest::Approx(1.0));
    CHECK(n.qd_x.cooperativity(cav) == doctest::Approx(2.5));
    CHECK(std::norm(cfg.spin().alpha) == 1.0);
    CHECK(cfg.mode_geometry().delta_lambda_10_nm == 2.0);
    CHECK(cfg.mirror_spec().t_mirror == 1e-4);
    CHECK(cfg.fit.options.max_iter == 50);
    CHECK(cfg.fit.bounds.at("C") == std::pair<double, double>(0.0, 10.0));
    CHECK(cfg.fit.initial.at("gamma_perp") == 3.0);
}

TEST_CASE("config errors")
{
    CHECK_THROWS_AS(io::parse_config(R"({"cavity": {"kappa": 77}})"), ParseError);
    CHECK_THROWS_AS(io::parse_config(R"({"extra": {}})"), ParseError);
    CHECK_THROWS_AS(io::parse_config(R"({"cavity": {"lambda_nm": "940"}})"), ParseError);
    CHECK_THROWS_AS(io::parse_config("{"), ParseError);
    CHECK_THROWS_AS(io::parse_config("[]"), ParseError);
    CHECK_THROWS_AS(io::parse_config(R"({"fit": {"bounds": {"C": [1]}}})"), ParseError);
    CHECK_THROWS_AS(io::parse_config(R"({"fit": {"bounds": {"nope": [0, 1]}}})"), ParseError);
    CHECK_THROWS_AS(io::read_config("/nonexistent/config.json"), IoError);
}

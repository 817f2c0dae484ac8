#ifndef QDCAVITY_CLI_HPP
#define QDCAVITY_CLI_HPP

#include "qdcavity/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace qdcavity::cli
{

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kDomainError = 1;
inline constexpr int kUsageError = 2;

// Entry point shared by the executable and the tests. argv[0] is the program
// name.
int run(int argc, const char *const argv[], std::ostream &out, std::ostream &err);
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

struct Extremum
{
    double frequency_ghz = 0.0; // parabolic refinement of the grid point
    double value = 0.0;
};

// Strict interior local maxima / minima of the scan intensity.
std::vector<Extremum> local_maxima(const SpectralScan &scan);
std::vector<Extremum> local_minima(const SpectralScan &scan);

} // namespace qdcavity::cli

#endif

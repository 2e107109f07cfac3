#ifndef PPP_TOOLS_CLI_HPP
#define PPP_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace ppp::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDomain = 3, kIo = 4 };

/// Return-level axis of the extrapolation figure, -log2(G_{n/2} T) with
/// G_j = j/(n+1).
double return_level_axis(double T, int n);
/// Extrapolation ratio T/(n+1): how far T lies beyond the sample's own span.
double extrapolation_ratio(double T, int n);

/// Runs the command line tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ppp::cli

#endif  // PPP_TOOLS_CLI_HPP

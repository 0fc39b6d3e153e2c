#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace signgate {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 2;
inline constexpr int numerical = 3;
} // namespace exit_code

struct InferRequest {
    std::string input;              ///< path; one statistic per line unless csv_column is set
    std::optional<std::string> csv_column; ///< header name or 1-based index
    std::string procedure = "lc";   ///< by, lc, nlc, tce, fixed-alpha
    double alpha_s = 0.1;
    std::optional<double> alpha;    ///< fixed-alpha only
    double s = 0.5;                 ///< fixed-alpha only
    std::string model = "ald0";     ///< tce only
    std::string output;             ///< empty writes to the output stream
};

int cmd_infer(const InferRequest& request, std::ostream& out, std::ostream& err);

struct SimulateRequest {
    std::string scenario;
    std::optional<std::size_t> replicates;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> env_seed;
    unsigned workers = 1;
    std::string output;
    std::string plot;
};

int cmd_simulate(const SimulateRequest& request, std::ostream& out, std::ostream& err);

inline constexpr double kTable1Alpha = 0.05;
/// Printed endpoints (-3.92, 3.92) of the s = 1/2 row equal 2 z_{0.975}; the
/// rows are reproduced with Y = theta + 2 Z.
inline constexpr double kTable1NoiseSd = 2.0;

struct Table1Row {
    std::string label; ///< sU, sD, sE
    double s;
    double lower_z;
    double upper_z;
    double mser;
    double msdr;
};

/// Usual, MSDR-maximizing and MSER-minimizing splits for theta ~ chi2_3 - 3
/// at alpha = 0.05.
std::vector<Table1Row> compute_table1(double noise_sd = kTable1NoiseSd);

int cmd_table1(const std::string& output, double noise_sd, std::ostream& out, std::ostream& err);

/// Full command line entry point; returns the process exit code.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace signgate

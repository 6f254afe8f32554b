#pragma once

#include "mtfee/config.hpp"
#include "mtfee/params.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mtfee {

inline constexpr const char* kVersion = "mtfee 1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Parses argv (subcommand, --config, --paths, --seed, --out, --set key=value)
/// and runs. Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs a fully resolved configuration. Artifacts go to cfg.output_dir together
/// with a `manifest`; on failure everything this run wrote is removed.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Cross-method solver checks at desk scale (q̄ = 10 lattice, MC at q̄ = 5, T = 10).
std::vector<CheckResult> run_selfcheck(const ModelParams& base, std::uint64_t seed);

}  // namespace mtfee

#pragma once
/**
 * @file  cli.hpp
 * @brief The `prefnav` command line tool as a callable function.
 *
 * Subcommands: gen-dataset, train-vae, train-predictor, train-policy,
 * rollout, evaluate, frechet, serve. Exit codes: 0 success, 1 usage error,
 * 2 runtime error. Every run writes config.json (the resolved parameters)
 * into its output directory. Parameter precedence: flags, then the JSON file
 * given by --config, then built-in defaults.
 */

#include <iosfwd>

namespace prefnav::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Data root: $PREFNAV_DATA_DIR when set, otherwise the bundled data directory.
[[nodiscard]] const char* data_root();

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace prefnav::cli

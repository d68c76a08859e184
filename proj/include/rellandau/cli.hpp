#pragma once

// Command-line front end. Exit codes: 0 success, 1 invariant or numeric
// failure, 2 invalid flags or configuration.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "rellandau/estimates.hpp"
#include "rellandau/sde.hpp"

namespace rellandau::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

enum class InitialData { Juttner, Anisotropic };
enum class EnsembleFormat { Csv, Binary };

/// Parsed JSON configuration. Every section and key is optional; unknown
/// keys are rejected.
struct Config {
  double eps_reg = 1e-3;  // kernel.eps_reg; default for sim.eps_reg

  std::string bound_id = "all";  // survey.bound_id: a bound, an integral survey, or "all"
  std::string density = "juttner";
  std::size_t survey_n = 100000;
  std::uint64_t survey_seed = 0;

  sde::SimConfig sim;
  InitialData initial = InitialData::Juttner;

  double delta = 1e-2;  // couple.delta, shift along e1 of the second ensemble

  std::filesystem::path out_dir = ".";
  EnsembleFormat format = EnsembleFormat::Csv;
};

/// Throws ConfigError on malformed JSON, wrong types, unknown keys or values
/// outside their valid range.
Config parse_config(const std::string& json_text);
Config load_config(const std::filesystem::path& path);

/// Initial ensemble of the given kind: Juttner samples, or the same samples
/// with all momentum rotated onto the x axis.
transport::Ensemble initial_ensemble(InitialData kind, std::size_t n, std::uint64_t seed);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rellandau::cli

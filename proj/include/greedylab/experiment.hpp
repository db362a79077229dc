#pragma once

// Batch experiment runner behind the greedylab command line.
//
// Exit codes: 0 success, 1 usage/config/input error, 2 a rate-theorem bound
// was violated.
//
// Seeds: a config may carry a top-level "seed"; GREEDYLAB_SEED overrides it.
// dictionary.seed and targets.seed default to derive_seed(seed, 1) and
// derive_seed(seed, 2). Target i is drawn with derive_seed(targets.seed, i).

#include "greedylab/greedy.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace greedylab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitBoundViolation = 2;

/// Config problem with the 1-based line it was traced to (0 if unknown).
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& message, int line)
      : std::runtime_error(message), line(line) {}
  int line;
};

struct AlgorithmSpec {
  Algorithm algorithm;
  std::optional<WeaknessSequence> ts;
  double ls_tol = 1e-12;
  /// Unique within a config: algorithm name plus weakness description.
  std::string display_name;
};

struct ExperimentConfig {
  struct GeometrySpec {
    std::string kind;
    double p = 2.0;
  } geometry;

  struct DictionarySpec {
    std::string generator;
    Index n = 0;
    Index K = 0;
    Index count = 1;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> atoms;
    std::string path;
  } dictionary;

  struct TargetSpec {
    Index count = 0;
    Index sparsity = 1;
    double M = 1.0;
    std::uint64_t seed = 0;
    /// Explicit certificates; when non-empty they replace random targets.
    std::vector<std::map<Index, double>> coefficients;
  } targets;

  std::vector<AlgorithmSpec> algorithms;
  int m_max = 100;
  double eps = 0.0;

  struct OutputSpec {
    std::filesystem::path dir = "greedylab_out";
    bool json = true;
    bool csv = false;
  } output;
};

/// Parses and validates a JSON config. Unknown keys, missing seeds, unknown
/// generators or algorithms, and algorithm/geometry mismatches all raise
/// ConfigError.
ExperimentConfig parse_config(const std::string& text,
                              std::optional<std::uint64_t> seed_override = std::nullopt);

/// GREEDYLAB_SEED from the environment, if set.
std::optional<std::uint64_t> seed_from_environment();

struct RunOptions {
  int jobs = 1;
  std::optional<std::filesystem::path> out_dir;
};

int cmd_run(const std::filesystem::path& config_path, const RunOptions& options,
            std::ostream& out, std::ostream& err);

int cmd_validate(const std::filesystem::path& trace_path,
                 const std::filesystem::path& target_path, std::ostream& out, std::ostream& err);

int cmd_rate(const std::vector<std::filesystem::path>& trace_paths, int m_min,
             const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);

}  // namespace greedylab

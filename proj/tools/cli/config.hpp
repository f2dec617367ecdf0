#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gridquant/channel.hpp>

namespace gridquant::cli {

/// Rejected configuration: unknown key, wrong type, out-of-range value, missing file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemConfig {
  enum class Kind { Quadratic, Logistic, Csv };
  Kind kind = Kind::Quadratic;
  std::size_t nodes = 4;
  std::size_t dim = 3;
  double mu = 1.0;             // quadratic
  double l = 10.0;             // quadratic
  double linear_scale = 1.0;   // quadratic
  std::size_t samples = 2000;  // logistic
  double rho = 1.0;            // logistic, csv
  std::filesystem::path path;  // csv
  std::uint64_t seed = 1;
};

struct TopologyConfig {
  enum class Kind { Master, EdgeList, Geometric, Path, Complete };
  Kind kind = Kind::Master;
  std::filesystem::path path;
  double radius = 0.3;
  std::uint64_t seed = 1;
};

enum class AlgorithmKind { Gd, Pgd, Dual };

struct BitsConfig {
  enum class Kind { Fixed, Auto, Range };
  Kind kind = Kind::Fixed;
  unsigned value = 16;
  unsigned lo = 1, hi = 16;
};

/// Closed-form constants used instead of a problem instance.
struct AnalyticConfig {
  double gain = 1.0;
  double sigma = 0.9;
  double bound = 1.0;
  std::size_t dim = 1;
};

struct OverheadConfig {
  double a = 0.0;
  double c = 0.0;
};

enum class PolicyKind { UntilSuccess, FixedRounds };

struct ExperimentConfig {
  std::optional<ProblemConfig> problem;
  std::optional<AnalyticConfig> analytic;
  TopologyConfig topology;
  AlgorithmKind algorithm = AlgorithmKind::Gd;
  BitsConfig bits;
  double theta = 0.0;
  std::optional<OverheadConfig> overhead;
  std::optional<RateModel> rate;
  double loss = 0.0;
  std::vector<double> loss_grid;
  std::optional<std::size_t> links;
  PolicyKind policy = PolicyKind::UntilSuccess;
  double delta = 0.9;
  double eps = 0.1;
  std::size_t horizon = 200;
  std::uint64_t seed = 1;
  std::filesystem::path output = ".";
  std::optional<double> bound;
  std::optional<double> gain;
  std::optional<double> alpha;
  std::size_t replicas = 1000;
  bool empirical = false;
};

/// Parses JSON text. Relative file paths are resolved against base_dir.
ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace gridquant::cli

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "unilab/mc.hpp"

namespace unilab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

inline constexpr std::string_view kCsvHeader =
    "tester,n,m,epsilon,gamma,side,trials,failures,delta_hat,ci_low,ci_high,threshold,beta,x_axis,seed";

inline constexpr std::string_view kWorkersEnv = "UNIFORMITY_LAB_WORKERS";

/// Malformed configuration or arguments (exit 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Experiment configuration (JSON).

struct GridConfig {
  std::vector<std::int64_t> n_values;
  std::optional<std::int64_t> m;  // unset: m = n at every point

  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct EpsilonRule {
  enum class Kind { kFixed, kFigure };
  Kind kind = Kind::kFixed;
  double epsilon = 0.1;  // kFixed
  double scale = 0.7;    // kFigure: eps = scale * n^{-1/exponent}
  double exponent = 8.1;

  double at(std::int64_t n) const;

  friend bool operator==(const EpsilonRule&, const EpsilonRule&) = default;
};

struct RunConfig {
  std::vector<mc::TesterChoice> testers;
  GridConfig grid;
  EpsilonRule epsilon_rule;
  double gamma = 0.5;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(std::string_view text);
nlohmann::json to_json(const RunConfig& config);

mc::ExperimentPlan plan_from_config(const RunConfig& config);

/// Worker count after applying the UNIFORMITY_LAB_WORKERS override.
unsigned effective_workers(unsigned configured);

// ---------------------------------------------------------------------------
// CSV rows.

struct RunRow {
  std::string tester;
  std::int64_t n = 0;
  std::int64_t m = 0;
  double epsilon = 0.0;
  double gamma = 0.0;
  std::string side;
  std::int64_t trials = 0;
  std::int64_t failures = 0;
  double delta_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double threshold = 0.0;
  double beta = 0.0;
  double x_axis = 0.0;  // n^2 eps^4 / m
  std::uint64_t seed = 0;
};

RunRow to_run_row(const mc::ExperimentRow& row);

/// 9 significant digits, "." separator, independent of the global locale.
std::string format_real(double value);

void write_csv(std::ostream& out, const std::vector<RunRow>& rows);
std::vector<RunRow> read_csv(std::istream& in);

// ---------------------------------------------------------------------------
// SVG.

/// 800x600 log-scale failure plot: one polyline and one shaded band per tester.
std::string render_svg(const std::vector<RunRow>& rows);

// ---------------------------------------------------------------------------
// Entry point shared by the executable and the tests.

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unilab::cli

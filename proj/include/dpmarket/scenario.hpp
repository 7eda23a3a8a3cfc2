#ifndef DPMARKET_SCENARIO_HPP
#define DPMARKET_SCENARIO_HPP

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dpmarket/oracle.hpp"
#include "dpmarket/types.hpp"

namespace dpmarket {

// Scenario documents are flat key-value text, one `key = value` per line.
// '#' starts a comment; blank lines are ignored; lists use brackets.
//
//   coeffs = [1, 0, 2]
//   privacy_weights = [0.5, 0.25, 1.0]
//   gamma = 1.0
//   sigma_min = 0.01
//   p = 1.0
//   norm_kind = l2                      # or weighted_l2 (+ norm_weights)
//   intensity_kind = log_support        # constant | table | log_shift
//   intensity_value = 10.0              # constant value / log_shift offset
//   intensity_table = [1, 0, 2]: 3.5; [2, 0, 4]: 1.25
//   sigma_min_override = [1, 0, 2]: 0.5            # optional, repeatable
//   sweep_var = k                       # optional sweep block
//   sweep_lo = 0.01
//   sweep_hi = 100
//   sweep_points = 200
//   sweep_scale = log                   # or linear
//
// Unknown keys are rejected by name.

enum class SweepVariable { K, Q, P, Gamma };

std::string_view sweep_variable_name(SweepVariable v);

struct SweepRequest {
  SweepVariable variable = SweepVariable::K;
  oracle::GridSpec grid;
};

struct ScenarioDocument {
  LinearQuery query;
  MarketScenario scenario;
  std::optional<SweepRequest> sweep;
};

// Malformed document: syntax, unknown key, missing key, bad payload.
// Distinct from the std::invalid_argument thrown on invariant violations.
class ScenarioParseError : public std::runtime_error {
 public:
  explicit ScenarioParseError(const std::string& message)
      : std::runtime_error(message) {}
};

ScenarioDocument parse_scenario(std::string_view text,
                                bool allow_out_of_range_p = false);

ScenarioDocument load_scenario(const std::filesystem::path& path,
                               bool allow_out_of_range_p = false);

// Shortest round-trip decimal rendering (<= 17 significant digits); the
// same bytes re-parse to the same double.
std::string format_double(double value);

}  // namespace dpmarket

#endif  // DPMARKET_SCENARIO_HPP

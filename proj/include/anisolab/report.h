#ifndef ANISOLAB_REPORT_H_
#define ANISOLAB_REPORT_H_

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "json.hpp"

namespace anisolab {

enum class CheckState { kPass, kDegenerate, kHypothesisNotMet, kFail };

std::string_view to_string(CheckState state);
CheckState check_state_from_string(std::string_view name);

// Outcome of one numerically verified estimate. `ratio` is the empirical
// constant (lhs / rhs) when that quotient is meaningful, NaN otherwise.
struct InequalityReport {
  std::string check_name;
  std::string anchor;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  CheckState state = CheckState::kPass;
  std::uint64_t seed = 0;
  nlohmann::json details = nlohmann::json::object();

  bool passed() const { return state != CheckState::kFail; }
};

// Serializes with the fixed report schema: check_name, paper_anchor, lhs,
// rhs, empirical_gamma, state, seed, grid_meta (when present in details)
// and every remaining entry of `details`. Non-finite numbers become null.
nlohmann::json to_json(const InequalityReport& report);
InequalityReport report_from_json(const nlohmann::json& j);

// Replaces NaN/inf with null so dumps stay valid JSON.
nlohmann::json finite_or_null(double value);

}  // namespace anisolab

#endif  // ANISOLAB_REPORT_H_

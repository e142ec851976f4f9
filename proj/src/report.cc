#include "anisolab/report.h"

#include <cmath>
#include <stdexcept>

namespace anisolab {

std::string_view to_string(CheckState state) {
  switch (state) {
    case CheckState::kPass:
      return "pass";
    case CheckState::kDegenerate:
      return "degenerate";
    case CheckState::kHypothesisNotMet:
      return "hypothesis-not-met";
    case CheckState::kFail:
      return "fail";
  }
  return "fail";
}

CheckState check_state_from_string(std::string_view name) {
  if (name == "pass") return CheckState::kPass;
  if (name == "degenerate") return CheckState::kDegenerate;
  if (name == "hypothesis-not-met") return CheckState::kHypothesisNotMet;
  if (name == "fail") return CheckState::kFail;
  throw std::invalid_argument("unknown check state: " + std::string(name));
}

nlohmann::json finite_or_null(double value) {
  if (std::isfinite(value)) return value;
  return nullptr;
}

nlohmann::json to_json(const InequalityReport& report) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : report.details.items()) j[key] = value;
  j["check_name"] = report.check_name;
  j["paper_anchor"] = report.anchor;
  j["lhs"] = finite_or_null(report.lhs);
  j["rhs"] = finite_or_null(report.rhs);
  j["empirical_gamma"] = finite_or_null(report.ratio);
  j["state"] = std::string(to_string(report.state));
  j["seed"] = report.seed;
  if (!j.contains("grid_meta")) j["grid_meta"] = nullptr;
  return j;
}

namespace {
double number_or_nan(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.at(key).get<double>();
}
}  // namespace

InequalityReport report_from_json(const nlohmann::json& j) {
  InequalityReport r;
  r.check_name = j.at("check_name").get<std::string>();
  r.anchor = j.value("paper_anchor", std::string());
  r.lhs = number_or_nan(j, "lhs");
  r.rhs = number_or_nan(j, "rhs");
  r.ratio = number_or_nan(j, "empirical_gamma");
  r.state = check_state_from_string(j.at("state").get<std::string>());
  r.seed = j.value("seed", std::uint64_t{0});
  for (const auto& [key, value] : j.items()) {
    if (key == "check_name" || key == "paper_anchor" || key == "lhs" ||
        key == "rhs" || key == "empirical_gamma" || key == "state" ||
        key == "seed") {
      continue;
    }
    r.details[key] = value;
  }
  return r;
}

}  // namespace anisolab

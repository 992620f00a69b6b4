#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace obsest {

enum class VerifyLevel { fast, full };

VerifyLevel parse_verify_level(const std::string& name);

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::fast;
  std::uint64_t seed = 0;
  /// Test hook: multiplies every constructed S_n before checking. Anything
  /// other than 1 must make the projector checks fail.
  double projector_scale = 1.0;
};

/// One line of the verification report.
struct CheckResult {
  std::string check;
  nlohmann::json params;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

nlohmann::json to_json(const CheckResult& result);

/// Runs the exact symmetric-subspace suite. fast covers d = 2, n ≤ 3; full
/// covers d = 2..8 up to dⁿ = 4096 (the dense POVM sums stop at dⁿ = 512).
std::vector<CheckResult> run_verify(const VerifyOptions& options);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace obsest

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace zongd {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Numeric verification gates: the closed-form rank-one inverse against the
/// dense solver, the score-expectation identity, the KL Hessian and Taylor
/// links to the Fisher matrix, the constrained steepest-descent direction,
/// estimator consistency, and query accounting. Deterministic per seed.
CheckResult check_sherman_morrison(uint64_t seed);
CheckResult check_score_expectation_suite(uint64_t seed);
CheckResult check_kl_hessian_suite(uint64_t seed);
CheckResult check_kl_taylor_suite(uint64_t seed);
CheckResult check_steepest_descent_suite(uint64_t seed);
CheckResult check_zo_estimator_consistency(uint64_t seed);
CheckResult check_query_accounting(uint64_t seed);

std::vector<CheckResult> run_math_suite(uint64_t seed);

}  // namespace zongd

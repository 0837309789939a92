#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regmdp/mdp.hpp"
#include "regmdp/regularizer.hpp"

namespace regmdp {

struct AuditRow {
  std::string property;
  std::size_t trials = 0;
  /// Positive slack means the property was violated by that much; negative
  /// is the margin it held by.
  double worst_slack = 0.0;
  bool pass = false;
};

struct AuditReport {
  std::vector<AuditRow> rows;
  bool pass = false;

  /// Fixed-width table, one row per property, plus an overall verdict line.
  std::string render() const;
};

/// Property batteries over the regularized backup operator, run for every
/// regularizer x lambda pair: contraction measured against the asserted
/// modulus gamma_claim (so auditing a discount-perturbed copy against the
/// original discount fails loudly), monotonicity, translation, the
/// hard/soft backup sandwich, and the performance-error bound (one solve
/// pair per regularizer and lambda). Random value functions come from a
/// splitmix64 stream seeded with seed; lambdas may include 0.
AuditReport run_audit(const TabularMdp& mdp, const std::vector<Regularizer>& regs,
                      const std::vector<double>& lambdas, std::size_t trials,
                      std::uint64_t seed, double gamma_claim);

}  // namespace regmdp

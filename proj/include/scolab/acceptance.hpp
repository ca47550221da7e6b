#pragma once

#include <functional>

#include "scolab/report.hpp"

namespace scolab {

struct AcceptanceOptions {
  bool determinism_rerun = true;
  double time_budget_s = 600.0;
  /// Called once per finished criterion, in order.
  std::function<void(const CriterionResult&)> on_criterion;
};

/// Runs the ten acceptance criteria against cfg. report.criteria holds one
/// entry per criterion; report.rows holds every ERM and GD trial that ran.
Report run_acceptance(const LabConfig& cfg, const AcceptanceOptions& opts = {});

/// Individual checks, usable on their own.
CriterionResult check_code_certification(const LabConfig& cfg);
CriterionResult check_concentration(const LabConfig& cfg);
CriterionResult check_argmax_soundness(const LabContext& ctx, long trajectory_claims,
                                       long trajectory_disagreements);
CriterionResult check_lipschitz(const LabContext& ctx);

}  // namespace scolab

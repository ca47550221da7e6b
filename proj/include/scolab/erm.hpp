#pragma once

#include <string>
#include <vector>

#include "scolab/hard_instance.hpp"

namespace scolab {

struct ErmSolution {
  ParamVector w_star;
  double stationarity_residual = 0.0;
  double feasibility_margin = 0.0;  // 1 - |w_star|
  double empirical_risk = 0.0;
};

/// w^c = (gamma^c/lambda^c) G(v_S^s)/|G(v_S^s)|, w^m = (1/lambda^m)((1/m) v_S - gamma^m v_S^s).
/// The residual is |empirical_subgrad(w_star)| under the standard branch selection.
ErmSolution closed_form_minimizer(const HardInstance& inst, const SampleStats& S);

struct OptimalityCounterexample {
  std::string kind;  // "below-minimum" or "strong-convexity"
  ParamVector w;
  double value = 0.0;
  double required = 0.0;
};

struct OptimalityReport {
  int probes = 0;
  double min_gap = 0.0;         // min F_S(w) - F_S(w_star)
  double min_sc_slack = 0.0;    // min F_S(w) - F_S(w_star) - (alpha/2)|w - w_star|^2
  std::vector<OptimalityCounterexample> counterexamples;

  bool ok() const { return counterexamples.empty(); }
};

/// Random probes: F_S(w) >= F_S(w*) - 1e-12 and F_S(w) >= F_S(w*) + (alpha/2)|w - w*|^2 - 1e-9.
OptimalityReport verify_global_optimality(const HardInstance& inst, const SampleStats& S,
                                          const ErmSolution& sol, int probes, std::uint64_t seed);

struct EpsilonProbe {
  double radius = 0.0;
  ParamVector w;
  double F_S_gap = 0.0;         // F_S(w) - F_S(w_star)
  double population_gap = 0.0; // F(w) - F(0)
};

struct EpsilonProbeResult {
  int sampled = 0;
  double max_radius = 0.0;  // sqrt(2 eps / alpha)
  std::vector<EpsilonProbe> kept;  // true eps-ERMs; r = 0 comes first
};

/// Samples w = Proj(w_star + r u), r uniform in [0, sqrt(2 eps/alpha)], and keeps
/// the true eps-ERMs together with their population gaps.
EpsilonProbeResult epsilon_erm_probe(const HardInstance& inst, const SampleStats& S,
                                     const ErmSolution& sol, double epsilon, int n_probes,
                                     std::uint64_t seed);

}  // namespace scolab

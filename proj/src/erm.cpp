#include "scolab/erm.hpp"

#include <cmath>
#include <limits>

namespace scolab {

ErmSolution closed_form_minimizer(const HardInstance& inst, const SampleStats& S) {
  const InstanceParams& p = inst.params;
  if (p.mode != Mode::kErm) throw InvalidInput("closed_form_minimizer: ERM instances only");
  if (S.k != p.k) throw InvalidInput("closed_form_minimizer: sample k differs from instance k");

  ErmSolution sol;
  sol.w_star = ParamVector(static_cast<std::size_t>(p.k));
  const Vec g = unit_normalize(encode(*inst.code, S.vSs));
  const double c = p.gamma_c / p.lambda_c;
  for (std::size_t b = 0; b < g.size(); ++b) sol.w_star.code[b] = c * g[b];
  for (int i = 0; i < p.k; ++i)
    sol.w_star.message[i] = (S.vS[i] / S.m - p.gamma_m * S.vSs[i]) / p.lambda_m;

  const EmpiricalEval ev = evaluate_empirical(inst, sol.w_star, S);
  sol.stationarity_residual = ev.subgrad.norm();
  sol.feasibility_margin = 1.0 - sol.w_star.norm();
  sol.empirical_risk = ev.value;
  return sol;
}

OptimalityReport verify_global_optimality(const HardInstance& inst, const SampleStats& S,
                                          const ErmSolution& sol, int probes, std::uint64_t seed) {
  const double alpha = inst.params.alpha();
  const double f_star = empirical_risk(inst, sol.w_star, S);
  Rng rng = make_rng(seed, 0, kTagProbe);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  OptimalityReport rep;
  rep.min_gap = std::numeric_limits<double>::infinity();
  rep.min_sc_slack = std::numeric_limits<double>::infinity();
  for (int n = 0; n < probes; ++n) {
    ParamVector w;
    switch (n % 4) {
      case 0: w = ParamVector(static_cast<std::size_t>(inst.k())); break;
      case 1: w = random_ball_point(inst.k(), rng); break;
      default: {
        // Log-uniform radius in [1e-6, 1] around the minimizer.
        const double r = std::pow(10.0, -6.0 * unif(rng));
        w = project_unit_ball(sol.w_star + r * random_direction(inst.k(), rng));
      }
    }
    if (n == 0) w = sol.w_star;
    const double f = empirical_risk(inst, w, S);
    const double gap = f - f_star;
    const double sc = gap - 0.5 * alpha * (w - sol.w_star).norm_sq();
    rep.min_gap = std::min(rep.min_gap, gap);
    rep.min_sc_slack = std::min(rep.min_sc_slack, sc);
    if (gap < -1e-12) rep.counterexamples.push_back({"below-minimum", w, f, f_star - 1e-12});
    if (sc < -1e-9) rep.counterexamples.push_back({"strong-convexity", w, gap, sc});
    ++rep.probes;
  }
  return rep;
}

EpsilonProbeResult epsilon_erm_probe(const HardInstance& inst, const SampleStats& S,
                                     const ErmSolution& sol, double epsilon, int n_probes,
                                     std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw InvalidInput("epsilon_erm_probe: epsilon must be positive");
  const double alpha = inst.params.alpha();
  const double f_star = empirical_risk(inst, sol.w_star, S);
  const ParamVector zero(static_cast<std::size_t>(inst.k()));
  const RiskValue F0 = population_risk(inst, zero);
  Rng rng = make_rng(seed, 0, kTagProbe);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  EpsilonProbeResult out;
  out.max_radius = std::sqrt(2.0 * epsilon / alpha);
  for (int n = 0; n < n_probes; ++n) {
    const double r = n == 0 ? 0.0 : out.max_radius * unif(rng);
    const ParamVector w = project_unit_ball(sol.w_star + r * random_direction(inst.k(), rng));
    const double gap = empirical_risk(inst, w, S) - f_star;
    ++out.sampled;
    if (gap > epsilon) continue;
    const RiskValue F = population_risk(inst, w);
    out.kept.push_back({r, w, gap, F.lo - F0.hi});
  }
  return out;
}

}  // namespace scolab

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scolab/feldman.hpp"
#include "scolab/good_code.hpp"
#include "scolab/param_space.hpp"
#include "scolab/rng.hpp"

namespace scolab {

inline constexpr int kDefaultBruteForceCap = 20;

/// Raised when an evaluation is requested beyond what the chosen route can do
/// exactly (k above the brute-force cap, interval risk off the encoded ray).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a parameter schedule violates its regime and relaxation does
/// not cover the failure.
class RegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { kErm, kGd };
const char* to_string(Mode mode);

/// Desk-scale relaxation. Multipliers scale the proof constants named in each
/// field; `enabled` lets lemma preconditions and the <= 1 caps fail without
/// aborting the schedule (the failures stay in the regime report).
struct Relax {
  bool enabled = false;
  double erm_lambda_m_lo = 1.0;  // the 9 in 9/sqrt(m) <= lambda^m
  double erm_lambda_m_hi = 1.0;  // the 27/2 in lambda^m < 27/(2 sqrt(m))
  double gd_lambda_m = 1.0;      // the 18 in 18/sqrt(2m) <= lambda^m < 18/sqrt(m)
  double gd_gamma_c = 1.0;       // the 30 in gamma^c <= sqrt(gamma^m / (30 sqrt(m) eta T))
  double gd_lambda_c = 1.0;      // the 4 in lambda^c = 4 / (rho eta T)
  double gamma_m_margin = 1.0;   // multiplies the scheduled GD gamma^m
};

struct InstanceParams {
  Mode mode = Mode::kErm;
  int k = 0;
  int m = 0;
  double zeta = 0.0;
  double gamma_c = 0.0;
  double gamma_m = 0.0;
  double lambda_c = 0.0;
  double lambda_m = 0.0;
  double rho = 0.0;
  // Schedule inputs, echoed for reporting.
  double lambda = 0.0;   // ERM strong-convexity target
  double epsilon = 0.0;  // ERM accuracy
  double eta = 0.0;      // GD step size
  long T = 0;            // GD horizon
  Relax relax;

  double alpha() const { return std::min(lambda_m, lambda_c); }
};

struct RegimeCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  bool claim = true;  // false for lemma preconditions and caps
};

struct RegimeReport {
  std::vector<RegimeCheck> checks;

  bool claims_pass() const;
  bool preconditions_pass() const;
  std::vector<std::string> failures(bool claims_only = false) const;
};

struct Schedule {
  InstanceParams params;
  RegimeReport report;
};

// Constants of the ERM theorems.
double theorem1_lambda(int m);                             // 7 / m^{3/2}
double theorem1_epsilon(double lambda, double rho);        // lambda rho^2 / (4 72^2 7^4)
double theorem2_epsilon(double lambda, double rho, int m); // rho^2 / (4 72^2 7^2 lambda m^3)

/// Strongly convex ERM instance: gamma^m = 1/(2m), gamma^c = min{1/(18 m^1.5),
/// lambda/3}, lambda^c = lambda, zeta = gamma^c/lambda^c, lambda^m at the lower
/// end of its regime. Throws RegimeError when infeasible.
Schedule schedule_erm(int m, double lambda, double epsilon, double rho, const Relax& relax,
                      int k = 0);

/// GD instance: lambda^m = 18/sqrt(2m), gamma^m = 1/m - lambda^m/(18 sqrt m),
/// lambda^c = 4/(rho eta T), gamma^c = min{sqrt(gamma^m/(30 sqrt(m) eta T)),
/// lambda^c/sqrt 3}, zeta = gamma^c/lambda^c.
Schedule schedule_gd(int m, double eta, long T, double rho, const Relax& relax, int k = 0);

/// A sample S in [k]^m (0-based indices) with its aggregated delta-vector.
struct SampleStats {
  int m = 0;
  int k = 0;
  std::vector<int> draws;
  std::vector<int> mult;
  Vec vS;   // sum_j delta_{z_j}
  Vec vSs;  // -1 on sampled coordinates, +1 elsewhere
  double vS_norm = 0.0;
  bool conditioned = false;  // vS_norm <= 3 sqrt(m)
  std::vector<int> distinct;  // sampled coordinates, increasing

  int unsampled() const { return k - static_cast<int>(distinct.size()); }
};

/// delta_i(j) = 1/m - 2 if j == i else 1/m.
Vec delta_vector(int m, int k, int i);

SampleStats sample_stats(std::span<const int> draws, int k);
SampleStats draw_sample(int m, int k, Rng& rng);

/// A fully assembled loss f(w, i) over a shared code.
struct HardInstance {
  InstanceParams params;
  std::shared_ptr<const BinaryCode> code;
  FeldmanSpec feldman;
  int brute_force_cap = kDefaultBruteForceCap;

  int k() const { return params.k; }
};

HardInstance make_instance(const InstanceParams& params, std::shared_ptr<const BinaryCode> code,
                           int brute_force_cap = kDefaultBruteForceCap);

/// Exhaustive evaluation of p(w) = max_v gamma^m <v, w^m> - gamma^c <G(v)/|G(v)|, w^c>.
struct PBruteForce {
  double value = 0.0;
  std::uint64_t argmax = 0;  // message bits of the maximizing v
  double margin = 0.0;       // best minus second best, 0 on ties
  bool tie = false;

  Vec argmax_signs(int k) const { return bits_to_signs(argmax, k); }
};

struct PCertified {
  double value = 0.0;
  bool certified_unique = false;
  double slack = 0.0;  // 2 gamma^m min|w^m_i| - 2 gamma^c |w^c|
};

PBruteForce p_eval_bruteforce(const HardInstance& inst, const ParamVector& w);

/// Cheap certificate that `candidate` (which must equal sign(w^m)) is the
/// unique maximizer of p. Abstains (certified_unique = false) when the
/// Cauchy-Schwarz bound cannot separate it.
PCertified p_eval_certified(const HardInstance& inst, const ParamVector& w,
                            std::span<const double> candidate);

/// One table pass: Feldman maxima for `h_indices` together with p.
struct PointScan {
  FeldmanMaxima h;
  PBruteForce p;
};

PointScan scan_point(const HardInstance& inst, const ParamVector& w, std::span<const int> h_indices);

double loss(const HardInstance& inst, const ParamVector& w, int i);
ParamVector loss_subgrad(const HardInstance& inst, const ParamVector& w, int i);

/// Empirical risk, its selected subgradient, and the branch data behind them.
struct EmpiricalEval {
  double value = 0.0;
  ParamVector subgrad;
  bool feldman_zero = false;  // every h(., z_j) on its floor branch
  PBruteForce p;
};

EmpiricalEval evaluate_empirical(const HardInstance& inst, const ParamVector& w,
                                 const SampleStats& S);
double empirical_risk(const HardInstance& inst, const ParamVector& w, const SampleStats& S);
ParamVector empirical_subgrad(const HardInstance& inst, const ParamVector& w, const SampleStats& S);

struct RiskValue {
  bool exact = true;
  double lo = 0.0;
  double hi = 0.0;

  double mid() const { return 0.5 * (lo + hi); }
};

/// Population risk under D uniform on [k]. Exhaustive while k is within the
/// brute-force cap, certified otherwise.
RiskValue population_risk(const HardInstance& inst, const ParamVector& w);
RiskValue population_risk_exact(const HardInstance& inst, const ParamVector& w);
/// Interval route; requires w^c = c * G(u)/|G(u)| for some message u, c >= 0.
RiskValue population_risk_certified(const HardInstance& inst, const ParamVector& w);

/// h_D(w^c) - zeta(1 - rho/2): the Feldman part of F(w) - F(0).
double feldman_excess(const HardInstance& inst, const ParamVector& w);

/// min over random feasible pairs of 2[f(w2) - f(w1) - <g(w1), w2 - w1>] / |w2 - w1|^2.
double strong_convexity_probe(const HardInstance& inst, int pairs, std::uint64_t seed);

/// Uniform point in the unit ball of R^{3k} scaled by `radius`.
ParamVector random_ball_point(int k, Rng& rng, double radius = 1.0);
/// Uniform direction on the unit sphere of R^{3k}.
ParamVector random_direction(int k, Rng& rng);

}  // namespace scolab

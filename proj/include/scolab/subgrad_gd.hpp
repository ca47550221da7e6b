#pragma once

#include <optional>
#include <vector>

#include "scolab/hard_instance.hpp"

namespace scolab {

struct GDConfig {
  double eta = 0.1;
  long T = 1000;
  long suffix_s = 0;        // average iterates s+1..T
  long record_every = 0;    // 0 picks full storage when it fits, else a stride
  bool abort_on_violation = false;
  double trajectory_tol = 1e-8;

  void validate() const;
};

/// Certificates evaluated at the point w_{t-1} where step t queried its
/// subgradient. Step 1 (w_0 = 0) is certified by the initialization
/// argument: p(0) = 0 selects the zero branch of max{p, 0}.
struct StepCertificate {
  long t = 0;
  bool feldman_zero = false;
  bool p_argmax_is_vSs = false;
  bool p_positive = false;
  bool projection_inactive = false;
  double p_value = 0.0;
  double p_margin = 0.0;
  bool certified_unique = false;  // sign certificate claimed uniqueness
  bool certificate_agrees = true; // ...and the exhaustive argmax agreed
  double closed_form_dev = 0.0;   // |w_t - closed form|_inf after the step

  bool ok() const;
};

struct TrajectoryRecord {
  std::vector<long> recorded_t;
  std::vector<ParamVector> iterates;      // w_t for t in recorded_t
  std::vector<StepCertificate> per_step_cert;
  std::vector<double> empirical_risk;     // F_S(w_{t-1}) for t = 1..T
  ParamVector suffix_avg;
  long suffix_s = 0;
  long steps_run = 0;
  long T = 0;
  bool aborted = false;
  double max_closed_form_dev = 0.0;
  std::optional<long> first_divergence_step;
  long certified_claims = 0;
  long certificate_disagreements = 0;

  bool all_certificates_ok() const;
  std::optional<long> first_violation() const;
};

/// Projected subgradient descent on F_S from w_0 = 0.
TrajectoryRecord run_gd(const HardInstance& inst, const SampleStats& S, const GDConfig& cfg);

/// Closed-form iterate predicted when every certificate holds:
///   w_t^c = (gamma^c/lambda^c)(1 - (1 - eta lambda^c)^{t-1}) G(v_S^s)/|G(v_S^s)|
///   w_t^m = (1 - eta lambda^m)^{t-1}(eta/m) v_S
///         + ((1 - (1 - eta lambda^m)^{t-1})/lambda^m)((1/m) v_S - gamma^m v_S^s)
ParamVector closed_form_iterate(const HardInstance& inst, const SampleStats& S, double eta, long t);

struct TrajectoryComparison {
  double max_dev = 0.0;
  std::optional<long> first_divergence;
};

TrajectoryComparison compare_trajectory(const TrajectoryRecord& rec, const HardInstance& inst,
                                        const SampleStats& S, double eta, double tol = 1e-8);

/// Mean of w_{s+1}..w_T from the stored iterates (requires full storage).
ParamVector suffix_average(const TrajectoryRecord& rec, long s);

}  // namespace scolab

#include "scolab/subgrad_gd.hpp"

#include <cmath>

namespace scolab {

namespace {

constexpr double kFullStorageBytes = 64.0 * 1024 * 1024;

struct ClosedForm {
  ClosedForm(const HardInstance& inst, const SampleStats& S, double eta)
      : p(inst.params), vS(S.vS), vSs(S.vSs), m(S.m), eta(eta) {
    gbar = unit_normalize(encode(*inst.code, S.vSs));
  }

  ParamVector at(long t) const {
    const double qc = std::pow(1.0 - eta * p.lambda_c, static_cast<double>(t - 1));
    const double qm = std::pow(1.0 - eta * p.lambda_m, static_cast<double>(t - 1));
    const double c = (p.gamma_c / p.lambda_c) * (1.0 - qc);
    ParamVector w(static_cast<std::size_t>(p.k));
    for (std::size_t b = 0; b < w.code.size(); ++b) w.code[b] = c * gbar[b];
    for (int i = 0; i < p.k; ++i)
      w.message[i] = qm * (eta / m) * vS[i] + ((1.0 - qm) / p.lambda_m) * (vS[i] / m - p.gamma_m * vSs[i]);
    return w;
  }

  const InstanceParams& p;
  const Vec& vS;
  const Vec& vSs;
  int m;
  double eta;
  Vec gbar;
};

}  // namespace

void GDConfig::validate() const {
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidInput("gd: eta must lie in (0, 1)");
  if (T < 1) throw InvalidInput("gd: T must be positive");
  if (suffix_s < 0 || suffix_s >= T) throw InvalidInput("gd: suffix_s must lie in [0, T)");
  if (record_every < 0) throw InvalidInput("gd: record_every must be >= 0");
}

bool StepCertificate::ok() const {
  if (t == 1) return feldman_zero && !(p_value > 0.0) && projection_inactive && certificate_agrees;
  return feldman_zero && p_argmax_is_vSs && p_positive && projection_inactive && certificate_agrees;
}

bool TrajectoryRecord::all_certificates_ok() const { return !first_violation().has_value(); }

std::optional<long> TrajectoryRecord::first_violation() const {
  for (const auto& c : per_step_cert)
    if (!c.ok()) return c.t;
  return std::nullopt;
}

ParamVector closed_form_iterate(const HardInstance& inst, const SampleStats& S, double eta, long t) {
  if (t < 1) throw InvalidInput("closed_form_iterate: t must be >= 1");
  return ClosedForm(inst, S, eta).at(t);
}

TrajectoryRecord run_gd(const HardInstance& inst, const SampleStats& S, const GDConfig& cfg) {
  cfg.validate();
  const int k = inst.k();
  long stride = cfg.record_every;
  if (stride == 0) {
    const double bytes = static_cast<double>(cfg.T) * 3.0 * k * sizeof(double);
    stride = bytes <= kFullStorageBytes ? 1 : static_cast<long>(std::ceil(bytes / kFullStorageBytes));
  }

  const ClosedForm closed(inst, S, cfg.eta);
  const std::uint64_t vss_bits = message_bits(S.vSs);

  TrajectoryRecord rec;
  rec.T = cfg.T;
  rec.suffix_s = cfg.suffix_s;
  rec.per_step_cert.reserve(cfg.T);
  rec.empirical_risk.reserve(cfg.T);

  ParamVector w(static_cast<std::size_t>(k));
  ParamVector suffix_sum(static_cast<std::size_t>(k));
  for (long t = 1; t <= cfg.T; ++t) {
    const EmpiricalEval ev = evaluate_empirical(inst, w, S);
    rec.empirical_risk.push_back(ev.value);

    StepCertificate cert;
    cert.t = t;
    cert.feldman_zero = ev.feldman_zero;
    cert.p_value = ev.p.value;
    cert.p_margin = ev.p.margin;
    cert.p_positive = ev.p.value > 0.0;
    cert.p_argmax_is_vSs = ev.p.argmax == vss_bits && !ev.p.tie && ev.p.margin > 0.0;

    bool nonzero = true;
    for (double x : w.message) nonzero = nonzero && x != 0.0;
    if (nonzero) {
      Vec cand(k);
      for (int i = 0; i < k; ++i) cand[i] = w.message[i] > 0.0 ? 1.0 : -1.0;
      const PCertified pc = p_eval_certified(inst, w, cand);
      cert.certified_unique = pc.certified_unique;
      if (pc.certified_unique) {
        ++rec.certified_claims;
        cert.certificate_agrees = !ev.p.tie && ev.p.argmax == message_bits(cand);
        if (!cert.certificate_agrees) ++rec.certificate_disagreements;
      }
    }

    ParamVector y = w;
    y -= cfg.eta * ev.subgrad;
    cert.projection_inactive = y.norm() <= 1.0;
    w = project_unit_ball(y);

    cert.closed_form_dev = distance_inf(w, closed.at(t));
    if (cert.closed_form_dev > rec.max_closed_form_dev) rec.max_closed_form_dev = cert.closed_form_dev;
    if (!rec.first_divergence_step && cert.closed_form_dev > cfg.trajectory_tol)
      rec.first_divergence_step = t;

    if (t > cfg.suffix_s) suffix_sum += w;
    if (t % stride == 0 || t == cfg.T) {
      rec.recorded_t.push_back(t);
      rec.iterates.push_back(w);
    }
    const bool ok = cert.ok();
    rec.per_step_cert.push_back(cert);
    rec.steps_run = t;
    if (!ok && cfg.abort_on_violation) {
      rec.aborted = true;
      break;
    }
  }
  const long n = rec.steps_run - std::min(cfg.suffix_s, rec.steps_run);
  rec.suffix_avg = n > 0 ? (1.0 / static_cast<double>(n)) * suffix_sum : w;
  return rec;
}

TrajectoryComparison compare_trajectory(const TrajectoryRecord& rec, const HardInstance& inst,
                                        const SampleStats& S, double eta, double tol) {
  const ClosedForm closed(inst, S, eta);
  TrajectoryComparison out;
  for (std::size_t r = 0; r < rec.iterates.size(); ++r) {
    const double dev = distance_inf(rec.iterates[r], closed.at(rec.recorded_t[r]));
    out.max_dev = std::max(out.max_dev, dev);
    if (!out.first_divergence && dev > tol) out.first_divergence = rec.recorded_t[r];
  }
  return out;
}

ParamVector suffix_average(const TrajectoryRecord& rec, long s) {
  const long T = rec.steps_run;
  if (s < 0 || s >= T) throw InvalidInput("suffix_average: s must lie in [0, T)");
  if (rec.iterates.size() != static_cast<std::size_t>(T))
    throw InvalidInput("suffix_average: iterates were stored with a stride; rerun with record_every = 1");
  ParamVector sum(rec.iterates.front().k());
  for (long t = s + 1; t <= T; ++t) sum += rec.iterates[t - 1];
  return (1.0 / static_cast<double>(T - s)) * sum;
}

}  // namespace scolab

#include "scolab/hard_instance.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace scolab {

namespace {

// Non-strict inequalities that the schedules meet with equality are compared
// with a relative slack covering rounding only.
constexpr double kRoundingSlack = 1e-12;

RegimeCheck le(std::string name, double lhs, double rhs, bool claim = true) {
  return {std::move(name), lhs, rhs, lhs <= rhs + kRoundingSlack * std::max(1.0, std::abs(rhs)),
          claim};
}

RegimeCheck lt(std::string name, double lhs, double rhs, bool claim = true) {
  return {std::move(name), lhs, rhs, lhs < rhs, claim};
}

RegimeCheck ge(std::string name, double lhs, double rhs, bool claim = true) {
  return {std::move(name), lhs, rhs, lhs >= rhs - kRoundingSlack * std::max(1.0, std::abs(rhs)),
          claim};
}

RegimeCheck gt(std::string name, double lhs, double rhs, bool claim = true) {
  return {std::move(name), lhs, rhs, lhs > rhs, claim};
}

void add_caps(RegimeReport& r, const InstanceParams& p) {
  r.checks.push_back(le("cap: zeta <= 1", p.zeta, 1.0, false));
  r.checks.push_back(le("cap: gamma^c <= 1", p.gamma_c, 1.0, false));
  r.checks.push_back(le("cap: lambda^m <= 1", p.lambda_m, 1.0, false));
  r.checks.push_back(le("cap: lambda^c <= 1", p.lambda_c, 1.0, false));
  r.checks.push_back(le("cap: gamma^m <= 1/sqrt(k)", p.gamma_m, 1.0 / std::sqrt(p.k), false));
}

void finish(const Schedule& s) {
  const bool ok = s.report.claims_pass() &&
                  (s.params.relax.enabled || s.report.preconditions_pass());
  if (ok) return;
  std::ostringstream msg;
  msg << "schedule (" << to_string(s.params.mode) << ", m=" << s.params.m
      << ") infeasible; failing:";
  for (const auto& f : s.report.failures(s.params.relax.enabled)) msg << "\n  " << f;
  throw RegimeError(msg.str());
}

void check_mk(int m, int k) {
  if (m < 1) throw InvalidInput("schedule: m must be positive");
  if (k < 2 || k > kMaxCodeK) throw InvalidInput("schedule: k outside the supported code range");
}

std::string describe(const RegimeCheck& c) {
  std::ostringstream os;
  os.precision(6);
  os << c.name << " (lhs " << c.lhs << ", rhs " << c.rhs << ")";
  return os.str();
}

bool lex_less(std::uint64_t a, std::uint64_t b) {
  // Lexicographic on (v(0), v(1), ...) with +1 < -1, i.e. bit 0 before bit 1
  // at the lowest differing coordinate.
  const std::uint64_t d = a ^ b;
  if (d == 0) return false;
  return (a & (d & (~d + 1))) == 0;
}

Vec mean_delta(int m, int k) { return Vec(k, 1.0 / m - 2.0 / k); }

double quadratic_terms(const InstanceParams& p, const ParamVector& w) {
  return 0.5 * p.lambda_m * dot(w.message, w.message) + 0.5 * p.lambda_c * dot(w.code, w.code);
}

void check_point(const HardInstance& inst, const ParamVector& w) {
  if (w.k() != static_cast<std::size_t>(inst.k()) || w.code.size() != 2 * w.k())
    throw InvalidInput("instance: parameter vector has wrong block sizes");
  if (!w.finite()) throw InvalidInput("instance: non-finite parameter vector");
}

}  // namespace

const char* to_string(Mode mode) { return mode == Mode::kErm ? "ERM" : "GD"; }

bool RegimeReport::claims_pass() const {
  for (const auto& c : checks)
    if (c.claim && !c.pass) return false;
  return true;
}

bool RegimeReport::preconditions_pass() const {
  for (const auto& c : checks)
    if (!c.claim && !c.pass) return false;
  return true;
}

std::vector<std::string> RegimeReport::failures(bool claims_only) const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.pass && (c.claim || !claims_only)) out.push_back(describe(c));
  return out;
}

double theorem1_lambda(int m) { return 7.0 / std::pow(m, 1.5); }

double theorem1_epsilon(double lambda, double rho) {
  return lambda * rho * rho / (4.0 * 72.0 * 72.0 * std::pow(7.0, 4));
}

double theorem2_epsilon(double lambda, double rho, int m) {
  return rho * rho / (4.0 * 72.0 * 72.0 * 49.0 * lambda * std::pow(m, 3));
}

Schedule schedule_erm(int m, double lambda, double epsilon, double rho, const Relax& relax, int k) {
  if (k == 0) k = 2 * m;
  check_mk(m, k);
  if (!(lambda > 0.0)) throw InvalidInput("schedule_erm: lambda must be positive");
  if (!(epsilon >= 0.0)) throw InvalidInput("schedule_erm: epsilon must be >= 0");
  const double sm = std::sqrt(static_cast<double>(m));

  Schedule s;
  InstanceParams& p = s.params;
  p.mode = Mode::kErm;
  p.k = k;
  p.m = m;
  p.rho = rho;
  p.lambda = lambda;
  p.epsilon = epsilon;
  p.relax = relax;
  p.gamma_m = 1.0 / (2.0 * m);
  p.gamma_c = std::min(1.0 / (18.0 * std::pow(m, 1.5)), lambda / 3.0);
  p.lambda_c = lambda;
  p.zeta = p.gamma_c / p.lambda_c;
  p.lambda_m = 9.0 * relax.erm_lambda_m_lo / sm;

  auto& r = s.report.checks;
  r.push_back(ge("9/sqrt(m) <= lambda^m", p.lambda_m, 9.0 * relax.erm_lambda_m_lo / sm));
  r.push_back(lt("lambda^m < 27/(2 sqrt(m))", p.lambda_m, 13.5 * relax.erm_lambda_m_hi / sm));
  r.push_back(le("gamma^m <= 1/(2m)", p.gamma_m, 1.0 / (2.0 * m)));
  r.push_back(le("gamma^c <= gamma^m/(9 sqrt(m))", p.gamma_c, p.gamma_m / (9.0 * sm)));
  r.push_back(ge("lambda^c >= 3 gamma^c", p.lambda_c, 3.0 * p.gamma_c));
  r.push_back(ge("zeta >= gamma^c/lambda^c", p.zeta, p.gamma_c / p.lambda_c));
  r.push_back(le("lambda <= 1/sqrt(m)", lambda, 1.0 / sm, false));
  add_caps(s.report, p);
  finish(s);
  return s;
}

Schedule schedule_gd(int m, double eta, long T, double rho, const Relax& relax, int k) {
  if (k == 0) k = 2 * m;
  check_mk(m, k);
  if (!(eta > 0.0)) throw InvalidInput("schedule_gd: eta must be positive");
  if (T < 1) throw InvalidInput("schedule_gd: T must be positive");
  if (!(rho > 0.0 && rho < 0.5)) throw InvalidInput("schedule_gd: rho must lie in (0, 1/2)");
  const double sm = std::sqrt(static_cast<double>(m));
  const double etaT = eta * static_cast<double>(T);

  Schedule s;
  InstanceParams& p = s.params;
  p.mode = Mode::kGd;
  p.k = k;
  p.m = m;
  p.rho = rho;
  p.eta = eta;
  p.T = T;
  p.relax = relax;
  p.lambda_m = 18.0 * relax.gd_lambda_m / std::sqrt(2.0 * m);
  p.gamma_m = relax.gamma_m_margin * (1.0 / m - p.lambda_m / (18.0 * sm));
  p.lambda_c = 4.0 * relax.gd_lambda_c / (rho * etaT);
  p.gamma_c = std::min(std::sqrt(p.gamma_m / (30.0 * relax.gd_gamma_c * sm * etaT)),
                       p.lambda_c / std::sqrt(3.0));
  p.zeta = p.gamma_c / p.lambda_c;

  auto& r = s.report.checks;
  r.push_back(ge("18/sqrt(2m) <= lambda^m", p.lambda_m, 18.0 * relax.gd_lambda_m / std::sqrt(2.0 * m)));
  r.push_back(lt("lambda^m < 18/sqrt(m)", p.lambda_m, 18.0 * relax.gd_lambda_m / sm));
  r.push_back(lt("gamma^m < 1/m - lambda^m/(18 sqrt(m))", p.gamma_m, 1.0 / m - p.lambda_m / (18.0 * sm)));
  r.push_back(gt("gamma^m > 0", p.gamma_m, 0.0));
  r.push_back(le("gamma^c <= sqrt(gamma^m/(30 sqrt(m) eta T))", p.gamma_c,
                 std::sqrt(p.gamma_m / (30.0 * relax.gd_gamma_c * sm * etaT))));
  r.push_back(le("gamma^c <= lambda^c/sqrt(3)", p.gamma_c, p.lambda_c / std::sqrt(3.0)));
  r.push_back(ge("zeta >= gamma^c/lambda^c", p.zeta, p.gamma_c / p.lambda_c));
  r.push_back(gt("eta T > sqrt(m)", etaT, sm));
  r.push_back(lt("eta lambda^c < 1", eta * p.lambda_c, 1.0));
  r.push_back(lt("eta < 1", eta, 1.0, false));
  r.push_back(lt("eta lambda^m < 1", eta * p.lambda_m, 1.0, false));
  r.push_back(gt("m > 80^2", m, 6400.0, false));
  r.push_back(gt("m > 16/rho^2", m, 16.0 / (rho * rho), false));
  add_caps(s.report, p);
  finish(s);
  return s;
}

Vec delta_vector(int m, int k, int i) {
  if (m < 1) throw InvalidInput("delta_vector: m must be positive");
  if (i < 0 || i >= k) throw InvalidInput("delta_vector: index outside [0, k)");
  Vec d(k, 1.0 / m);
  d[i] = 1.0 / m - 2.0;
  return d;
}

SampleStats sample_stats(std::span<const int> draws, int k) {
  if (draws.empty()) throw InvalidInput("sample_stats: empty sample");
  if (k < 1) throw InvalidInput("sample_stats: k must be positive");
  SampleStats S;
  S.m = static_cast<int>(draws.size());
  S.k = k;
  S.draws.assign(draws.begin(), draws.end());
  S.mult.assign(k, 0);
  for (int z : draws) {
    if (z < 0 || z >= k) throw InvalidInput("sample_stats: draw outside [0, k)");
    ++S.mult[z];
  }
  S.vS.resize(k);
  S.vSs.resize(k);
  for (int i = 0; i < k; ++i) {
    S.vS[i] = 1.0 - 2.0 * S.mult[i];
    S.vSs[i] = S.mult[i] > 0 ? -1.0 : 1.0;
    if (S.mult[i] > 0) S.distinct.push_back(i);
  }
  S.vS_norm = norm(S.vS);
  S.conditioned = S.vS_norm <= 3.0 * std::sqrt(static_cast<double>(S.m));
  return S;
}

SampleStats draw_sample(int m, int k, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, k - 1);
  std::vector<int> draws(m);
  for (int& z : draws) z = pick(rng);
  return sample_stats(draws, k);
}

HardInstance make_instance(const InstanceParams& params, std::shared_ptr<const BinaryCode> code,
                           int brute_force_cap) {
  if (!code) throw InvalidInput("make_instance: null code");
  if (code->k != params.k) throw InvalidInput("make_instance: code length does not match k");
  if (code->rho != params.rho)
    throw InvalidInput("make_instance: params rho differs from the code's certified rho");
  HardInstance inst;
  inst.params = params;
  inst.feldman = make_feldman(code, params.zeta);
  inst.code = std::move(code);
  inst.brute_force_cap = brute_force_cap;
  return inst;
}

PointScan scan_point(const HardInstance& inst, const ParamVector& w, std::span<const int> h_indices) {
  check_point(inst, w);
  if (inst.k() > inst.brute_force_cap)
    throw CapabilityError("p: k = " + std::to_string(inst.k()) + " exceeds the brute-force cap " +
                          std::to_string(inst.brute_force_cap) + "; use p_eval_certified");
  const BinaryCode& code = *inst.code;
  const InstanceParams& p = inst.params;
  const std::uint64_t n = code.size();

  // corr[j] = <w^c, G(j)/|G(j)|> comes from one Walsh-Hadamard spectrum; the
  // message part of p is separable in the bits of j.
  thread_local std::vector<double> corr;
  corr.resize(n);
  code_spectrum(code, w.code, 1.0 / std::sqrt(static_cast<double>(code.length())), corr);
  const SignedDot msg(w.message, p.gamma_m);

  PointScan out{FeldmanMaxima(h_indices, inst.feldman.floor), {}};
  double best = -std::numeric_limits<double>::infinity();
  double second = best;
  std::uint64_t arg = 0;
  bool tie = false;
  for (std::uint64_t j = 0; j < n; ++j) {
    out.h.offer(j, corr[j]);
    const double val = msg(j) - p.gamma_c * corr[j];
    if (val > best) {
      second = best;
      best = val;
      arg = j;
      tie = false;
    } else if (val == best) {
      tie = true;
      second = best;
      if (lex_less(j, arg)) arg = j;
    } else if (val > second) {
      second = val;
    }
  }
  out.p = {best, arg, best - second, tie};
  return out;
}

PBruteForce p_eval_bruteforce(const HardInstance& inst, const ParamVector& w) {
  return scan_point(inst, w, {}).p;
}

PCertified p_eval_certified(const HardInstance& inst, const ParamVector& w,
                            std::span<const double> candidate) {
  check_point(inst, w);
  const InstanceParams& p = inst.params;
  if (candidate.size() != w.message.size())
    throw InvalidInput("p_eval_certified: candidate length != k");
  double min_abs = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const double wi = w.message[i];
    if (wi == 0.0) throw InvalidInput("p_eval_certified: w^m has a zero entry");
    if (candidate[i] != (wi > 0.0 ? 1.0 : -1.0))
      throw InvalidInput("p_eval_certified: candidate must equal sign(w^m)");
    min_abs = std::min(min_abs, std::abs(wi));
  }
  const Vec g = unit_normalize(encode(*inst.code, candidate));
  PCertified out;
  out.value = p.gamma_m * dot(candidate, w.message) - p.gamma_c * dot(g, w.code);
  out.slack = 2.0 * p.gamma_m * min_abs - 2.0 * p.gamma_c * norm(w.code);
  out.certified_unique = out.slack > 0.0;
  return out;
}

namespace {

// Subgradient of max{p, 0} given the scan result; the p == 0 tie selects 0.
void add_p_subgrad(const HardInstance& inst, const PBruteForce& pe, ParamVector& g) {
  if (!(pe.value > 0.0)) return;
  const InstanceParams& p = inst.params;
  const Vec gv = normalized_codeword(*inst.code, pe.argmax);
  for (std::size_t b = 0; b < g.code.size(); ++b) g.code[b] -= p.gamma_c * gv[b];
  for (int i = 0; i < inst.k(); ++i)
    g.message[i] += p.gamma_m * (((pe.argmax >> i) & 1u) ? -1.0 : 1.0);
}

}  // namespace

double loss(const HardInstance& inst, const ParamVector& w, int i) {
  if (i < 0 || i >= inst.k()) throw InvalidInput("loss: index outside [0, k)");
  const int idx[] = {i};
  const PointScan sc = scan_point(inst, w, idx);
  const InstanceParams& p = inst.params;
  return sc.h.value(0) - dot(w.message, delta_vector(p.m, p.k, i)) + std::max(sc.p.value, 0.0) +
         quadratic_terms(p, w);
}

ParamVector loss_subgrad(const HardInstance& inst, const ParamVector& w, int i) {
  if (i < 0 || i >= inst.k()) throw InvalidInput("loss_subgrad: index outside [0, k)");
  const int idx[] = {i};
  const PointScan sc = scan_point(inst, w, idx);
  const InstanceParams& p = inst.params;
  ParamVector g(static_cast<std::size_t>(p.k));
  if (sc.h.argmax(0) >= 0)
    g.code = normalized_codeword(*inst.code, static_cast<std::uint64_t>(sc.h.argmax(0)));
  const Vec d = delta_vector(p.m, p.k, i);
  for (int j = 0; j < p.k; ++j) g.message[j] = -d[j] + p.lambda_m * w.message[j];
  for (std::size_t b = 0; b < g.code.size(); ++b) g.code[b] += p.lambda_c * w.code[b];
  add_p_subgrad(inst, sc.p, g);
  return g;
}

EmpiricalEval evaluate_empirical(const HardInstance& inst, const ParamVector& w,
                                 const SampleStats& S) {
  const InstanceParams& p = inst.params;
  if (S.k != p.k) throw InvalidInput("evaluate_empirical: sample k differs from instance k");
  const PointScan sc = scan_point(inst, w, S.distinct);
  const double inv_m = 1.0 / S.m;

  EmpiricalEval out;
  out.p = sc.p;
  out.feldman_zero = true;
  ParamVector g(static_cast<std::size_t>(p.k));
  double h_sum = 0.0;
  for (std::size_t r = 0; r < sc.h.size(); ++r) {
    const double weight = S.mult[sc.h.index(r)] * inv_m;
    h_sum += weight * sc.h.value(r);
    if (sc.h.argmax(r) >= 0) {
      out.feldman_zero = false;
      const Vec x = normalized_codeword(*inst.code, static_cast<std::uint64_t>(sc.h.argmax(r)));
      for (std::size_t b = 0; b < g.code.size(); ++b) g.code[b] += weight * x[b];
    }
  }
  for (std::size_t b = 0; b < g.code.size(); ++b) g.code[b] += p.lambda_c * w.code[b];
  for (int j = 0; j < p.k; ++j) g.message[j] = -S.vS[j] * inv_m + p.lambda_m * w.message[j];
  add_p_subgrad(inst, sc.p, g);

  out.value = h_sum - inv_m * dot(w.message, S.vS) + std::max(sc.p.value, 0.0) +
              quadratic_terms(p, w);
  out.subgrad = std::move(g);
  return out;
}

double empirical_risk(const HardInstance& inst, const ParamVector& w, const SampleStats& S) {
  return evaluate_empirical(inst, w, S).value;
}

ParamVector empirical_subgrad(const HardInstance& inst, const ParamVector& w, const SampleStats& S) {
  return evaluate_empirical(inst, w, S).subgrad;
}

RiskValue population_risk_exact(const HardInstance& inst, const ParamVector& w) {
  const InstanceParams& p = inst.params;
  std::vector<int> all(p.k);
  for (int i = 0; i < p.k; ++i) all[i] = i;
  const PointScan sc = scan_point(inst, w, all);
  double h_sum = 0.0;
  for (std::size_t r = 0; r < sc.h.size(); ++r) h_sum += sc.h.value(r);
  const double v = h_sum / p.k - dot(w.message, mean_delta(p.m, p.k)) +
                   std::max(sc.p.value, 0.0) + quadratic_terms(p, w);
  return {true, v, v};
}

RiskValue population_risk_certified(const HardInstance& inst, const ParamVector& w) {
  check_point(inst, w);
  const InstanceParams& p = inst.params;
  const BinaryCode& code = *inst.code;

  // Recover (c, u) with w^c = c G(u)/|G(u)| from the systematic prefix.
  Vec u(p.k, 1.0);
  for (int i = 0; i < p.k; ++i) u[i] = w.code[i] < 0.0 ? -1.0 : 1.0;
  const double c = norm(w.code);
  if (c > 0.0) {
    const Vec g = unit_normalize(encode(code, u));
    double dev = 0.0;
    for (std::size_t b = 0; b < g.size(); ++b) dev = std::max(dev, std::abs(w.code[b] - c * g[b]));
    if (dev > 1e-12 * std::max(1.0, c))
      throw CapabilityError("population_risk_certified: w^c is not on an encoded ray");
  }

  Interval h{0.0, 0.0};
  for (int i = 0; i < p.k; ++i) {
    const Interval hi = h_certified_eval(inst.feldman, c, u, i);
    h.lo += hi.lo;
    h.hi += hi.hi;
  }
  h.lo /= p.k;
  h.hi /= p.k;

  // p: exact when the sign certificate holds, else [value at a sign vector, |.|_1 bound].
  Vec cand(p.k);
  bool has_zero = false;
  for (int i = 0; i < p.k; ++i) {
    cand[i] = w.message[i] < 0.0 ? -1.0 : 1.0;
    has_zero = has_zero || w.message[i] == 0.0;
  }
  Interval pv;
  const Vec gc = unit_normalize(encode(code, cand));
  const double at_cand = p.gamma_m * dot(cand, w.message) - p.gamma_c * dot(gc, w.code);
  const PCertified pc = has_zero ? PCertified{} : p_eval_certified(inst, w, cand);
  if (pc.certified_unique) {
    pv = {pc.value, pc.value};
  } else {
    double l1 = 0.0;
    for (double x : w.message) l1 += std::abs(x);
    pv = {at_cand, std::max(at_cand, p.gamma_m * l1 + p.gamma_c * c)};
  }

  const double rest = -dot(w.message, mean_delta(p.m, p.k)) + quadratic_terms(p, w);
  RiskValue out;
  out.lo = h.lo + std::max(pv.lo, 0.0) + rest;
  out.hi = h.hi + std::max(pv.hi, 0.0) + rest;
  out.exact = out.lo == out.hi;
  return out;
}

RiskValue population_risk(const HardInstance& inst, const ParamVector& w) {
  if (inst.k() <= inst.brute_force_cap) return population_risk_exact(inst, w);
  return population_risk_certified(inst, w);
}

double feldman_excess(const HardInstance& inst, const ParamVector& w) {
  const int k = inst.k();
  std::vector<int> all(k);
  for (int i = 0; i < k; ++i) all[i] = i;
  const FeldmanMaxima h = feldman_scan(inst.feldman, w.code, all);
  double sum = 0.0;
  for (std::size_t r = 0; r < h.size(); ++r) sum += h.value(r);
  return sum / k - inst.feldman.floor;
}

ParamVector random_direction(int k, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ParamVector u(static_cast<std::size_t>(k));
  double n = 0.0;
  do {
    for (double& x : u.code) x = gauss(rng);
    for (double& x : u.message) x = gauss(rng);
    n = u.norm();
  } while (n == 0.0);
  return (1.0 / n) * u;
}

ParamVector random_ball_point(int k, Rng& rng, double radius) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double r = radius * std::pow(unif(rng), 1.0 / (3.0 * k));
  return r * random_direction(k, rng);
}

double strong_convexity_probe(const HardInstance& inst, int pairs, std::uint64_t seed) {
  if (inst.params.mode != Mode::kErm)
    throw InvalidInput("strong_convexity_probe: ERM instances only");
  Rng rng = make_rng(seed, 0, kTagProbe);
  std::uniform_int_distribution<int> pick(0, inst.k() - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < pairs; ++t) {
    const ParamVector w1 = random_ball_point(inst.k(), rng);
    ParamVector w2 = random_ball_point(inst.k(), rng);
    // Mix in close pairs so local curvature is probed too.
    if (t % 2 == 1) w2 = project_unit_ball(w1 + (0.05 * unif(rng)) * random_direction(inst.k(), rng));
    const double d2 = (w2 - w1).norm_sq();
    if (d2 < 1e-16) continue;
    const int i = pick(rng);
    const ParamVector g = loss_subgrad(inst, w1, i);
    const double q = 2.0 * (loss(inst, w2, i) - loss(inst, w1, i) - dot(g, w2 - w1)) / d2;
    worst = std::min(worst, q);
  }
  return worst;
}

}  // namespace scolab

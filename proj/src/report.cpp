#include "scolab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scolab {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <class T>
T parse_num(const std::string& s, const std::string& what) {
  T v{};
  if constexpr (std::is_floating_point_v<T>) {
    std::size_t used = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw std::runtime_error("trials.csv: bad " + what + " '" + s + "'");
  } else {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw std::runtime_error("trials.csv: bad " + what + " '" + s + "'");
  }
  return v;
}

json sweep_json(const SweepResult& sw) {
  json pts = json::array();
  for (const SweepPoint& p : sw.points)
    pts.push_back({{"eta", p.eta},
                   {"T", p.T},
                   {"etaT", p.etaT},
                   {"pre_cap", p.pre_cap},
                   {"conditioned", p.conditioned},
                   {"median_feldman_excess", p.median_feldman_excess},
                   {"median_gap", p.median_gap},
                   {"min_bound_slack", p.min_bound_slack},
                   {"certificate_pass_rate", p.certificate_pass_rate},
                   {"median_erm_gd_gap", p.median_erm_gd_gap},
                   {"median_erm_exact_gap", p.median_erm_exact_gap},
                   {"max_erm_rel_dev", p.max_erm_rel_dev},
                   {"plateau_region", p.plateau_region}});
  return {{"points", pts}, {"slope", sw.slope}, {"monotone", sw.monotone}};
}

json aggregate_json(const TrialAggregate& a) {
  return {{"trials", a.trials},
          {"conditioned", a.conditioned},
          {"conditioned_fraction", a.conditioned_fraction},
          {"median_gap_lo", a.median_gap_lo},
          {"min_gap_lo", a.min_gap_lo},
          {"min_bound_slack", a.min_bound_slack},
          {"certificate_pass_rate", a.certificate_pass_rate},
          {"max_traj_dev", a.max_traj_dev}};
}

}  // namespace

const char* const kTrialCsvHeader =
    "seed,mode,m,k,eta,T,s,conditioned,vS_norm,gap_empirical,gap_pop_lo,gap_pop_hi,"
    "bound_predicted,certificates_ok,max_traj_dev,runtime_ms";

TrialRow to_row(const TrialResult& r) {
  TrialRow row;
  row.seed = r.seed;
  row.mode = to_string(r.mode);
  row.m = r.m;
  row.k = r.k;
  row.eta = r.eta;
  row.T = r.T;
  row.s = r.s;
  row.conditioned = r.conditioned;
  row.vS_norm = r.S.vS_norm;
  row.gap_empirical = r.gap_empirical;
  row.gap_pop_lo = r.gap_population.lo;
  row.gap_pop_hi = r.gap_population.hi;
  row.bound_predicted = r.bound_predicted;
  row.certificates_ok = r.certificates_ok;
  row.max_traj_dev = r.max_traj_dev;
  row.runtime_ms = r.runtime_ms;
  return row;
}

TrialAggregate aggregate_rows(const std::vector<TrialRow>& rows) {
  TrialAggregate a;
  a.trials = static_cast<long>(rows.size());
  std::vector<double> gaps;
  long ok = 0;
  bool first = true;
  for (const TrialRow& r : rows) {
    if (!r.conditioned) continue;
    ++a.conditioned;
    gaps.push_back(r.gap_pop_lo);
    ok += r.certificates_ok ? 1 : 0;
    const double slack = r.gap_pop_lo - r.bound_predicted;
    if (first) {
      a.min_gap_lo = r.gap_pop_lo;
      a.min_bound_slack = slack;
      first = false;
    }
    a.min_gap_lo = std::min(a.min_gap_lo, r.gap_pop_lo);
    a.min_bound_slack = std::min(a.min_bound_slack, slack);
    a.max_traj_dev = std::max(a.max_traj_dev, r.max_traj_dev);
  }
  if (a.trials > 0) a.conditioned_fraction = static_cast<double>(a.conditioned) / a.trials;
  if (a.conditioned > 0) a.certificate_pass_rate = static_cast<double>(ok) / a.conditioned;
  a.median_gap_lo = median(gaps);
  return a;
}

void write_trials_csv(const std::filesystem::path& path, const std::vector<TrialRow>& rows) {
  std::ofstream out = open_out(path);
  out << kTrialCsvHeader << '\n';
  for (const TrialRow& r : rows)
    out << r.seed << ',' << r.mode << ',' << r.m << ',' << r.k << ',' << fmt(r.eta) << ',' << r.T
        << ',' << r.s << ',' << (r.conditioned ? 1 : 0) << ',' << fmt(r.vS_norm) << ','
        << fmt(r.gap_empirical) << ',' << fmt(r.gap_pop_lo) << ',' << fmt(r.gap_pop_hi) << ','
        << fmt(r.bound_predicted) << ',' << (r.certificates_ok ? 1 : 0) << ','
        << fmt(r.max_traj_dev) << ',' << r.runtime_ms << '\n';
  close_out(out, path);
}

std::vector<TrialRow> read_trials_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kTrialCsvHeader)
    throw std::runtime_error(path.string() + ": unexpected header");
  std::vector<TrialRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 16) throw std::runtime_error(path.string() + ": expected 16 fields: " + line);
    TrialRow r;
    r.seed = parse_num<std::uint64_t>(f[0], "seed");
    r.mode = f[1];
    r.m = parse_num<int>(f[2], "m");
    r.k = parse_num<int>(f[3], "k");
    r.eta = parse_num<double>(f[4], "eta");
    r.T = parse_num<long>(f[5], "T");
    r.s = parse_num<long>(f[6], "s");
    r.conditioned = parse_num<int>(f[7], "conditioned") != 0;
    r.vS_norm = parse_num<double>(f[8], "vS_norm");
    r.gap_empirical = parse_num<double>(f[9], "gap_empirical");
    r.gap_pop_lo = parse_num<double>(f[10], "gap_pop_lo");
    r.gap_pop_hi = parse_num<double>(f[11], "gap_pop_hi");
    r.bound_predicted = parse_num<double>(f[12], "bound_predicted");
    r.certificates_ok = parse_num<int>(f[13], "certificates_ok") != 0;
    r.max_traj_dev = parse_num<double>(f[14], "max_traj_dev");
    r.runtime_ms = parse_num<long>(f[15], "runtime_ms");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& rec) {
  std::ofstream out = open_out(path);
  out << "t,feldman_zero,p_argmax_is_vSs,p_positive,projection_inactive,p_value,p_margin,"
         "closed_form_dev";
  const int k = rec.iterates.empty() ? 0 : static_cast<int>(rec.iterates.front().k());
  for (int i = 0; i < 2 * k; ++i) out << ",wc" << i;
  for (int i = 0; i < k; ++i) out << ",wm" << i;
  out << '\n';
  std::size_t next = 0;
  for (const StepCertificate& c : rec.per_step_cert) {
    out << c.t << ',' << c.feldman_zero << ',' << c.p_argmax_is_vSs << ',' << c.p_positive << ','
        << c.projection_inactive << ',' << fmt(c.p_value) << ',' << fmt(c.p_margin) << ','
        << fmt(c.closed_form_dev);
    while (next < rec.recorded_t.size() && rec.recorded_t[next] < c.t) ++next;
    if (next < rec.recorded_t.size() && rec.recorded_t[next] == c.t) {
      for (double x : rec.iterates[next].code) out << ',' << fmt(x);
      for (double x : rec.iterates[next].message) out << ',' << fmt(x);
    } else {
      for (int i = 0; i < 3 * k; ++i) out << ',';
    }
    out << '\n';
  }
  close_out(out, path);
}

bool Report::all_pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.pass; });
}

std::string summary_text(const Report& report) {
  std::ostringstream s;
  s << "lab " << report.command << " (lab " << kLabVersion << ", " << kAcceptanceSuiteVersion
    << ")\n";
  if (report.code)
    s << "code: k=" << report.code->k << " d_min=" << report.code->min_distance
      << " rho=" << fmt(report.code->rho) << " seed=" << report.code->seed << '\n';
  const TrialAggregate a = aggregate_rows(report.rows);
  s << "trials: " << a.trials << " conditioned: " << a.conditioned << " ("
    << fmt(a.conditioned_fraction) << ")\n";
  if (a.conditioned > 0)
    s << "median gap (lo): " << fmt(a.median_gap_lo) << "  min gap (lo): " << fmt(a.min_gap_lo)
      << "  min slack vs bound: " << fmt(a.min_bound_slack) << '\n';
  for (const auto& [k, v] : report.metrics) s << k << ": " << fmt(v) << '\n';
  if (report.sweep) {
    s << "sweep slope " << fmt(report.sweep->slope)
      << (report.sweep->monotone ? " monotone\n" : " not monotone\n");
    for (const SweepPoint& p : report.sweep->points)
      s << "  etaT=" << fmt(p.etaT) << " median_feldman_excess=" << fmt(p.median_feldman_excess)
        << " median_gap=" << fmt(p.median_gap) << " erm_rel_dev=" << fmt(p.max_erm_rel_dev)
        << '\n';
  }
  for (const CriterionResult& c : report.criteria)
    s << (c.pass ? "PASS" : "FAIL") << " C" << c.id << " " << c.name << ": " << c.detail << '\n';
  if (!report.criteria.empty()) s << (report.all_pass() ? "ALL PASS\n" : "FAILURES\n");
  return s.str();
}

void emit_report(const Report& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  write_trials_csv(out_dir / "trials.csv", report.rows);

  json j;
  j["command"] = report.command;
  j["versions"] = {{"lab", kLabVersion},
                   {"code_construction", kCodeConstructionVersion},
                   {"acceptance_suite", kAcceptanceSuiteVersion}};
  json echo = json::object();
  for (const auto& [k, v] : config_echo(report.cfg)) echo[k] = v;
  j["config"] = echo;
  if (report.code) {
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(report.code->fingerprint()));
    j["code"] = {{"k", report.code->k},
                 {"rho", report.code->rho},
                 {"min_distance", report.code->min_distance},
                 {"seed", report.code->seed},
                 {"parity_hash", hash}};
  }
  j["aggregate"] = aggregate_json(aggregate_rows(report.rows));
  json crit = json::array();
  for (const CriterionResult& c : report.criteria)
    crit.push_back({{"id", c.id},
                    {"name", c.name},
                    {"pass", c.pass},
                    {"detail", c.detail},
                    {"seconds", c.seconds}});
  j["criteria"] = crit;
  j["metrics"] = report.metrics;
  j["all_pass"] = report.all_pass();
  if (report.sweep) j["sweep"] = sweep_json(*report.sweep);

  const auto jpath = out_dir / "aggregate.json";
  std::ofstream jo = open_out(jpath);
  jo << j.dump(2) << '\n';
  close_out(jo, jpath);

  const auto spath = out_dir / "summary.txt";
  std::ofstream so = open_out(spath);
  so << summary_text(report);
  close_out(so, spath);
}

}  // namespace scolab

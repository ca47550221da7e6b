#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scolab/harness.hpp"

namespace scolab {

/// One data row of trials.csv.
struct TrialRow {
  std::uint64_t seed = 0;
  std::string mode;
  int m = 0;
  int k = 0;
  double eta = 0.0;
  long T = 0;
  long s = 0;
  bool conditioned = false;
  double vS_norm = 0.0;
  double gap_empirical = 0.0;
  double gap_pop_lo = 0.0;
  double gap_pop_hi = 0.0;
  double bound_predicted = 0.0;
  bool certificates_ok = false;
  double max_traj_dev = 0.0;
  long runtime_ms = 0;

  bool operator==(const TrialRow&) const = default;
};

TrialRow to_row(const TrialResult& r);

/// Conditioned-trial aggregates; every field is a function of the rows alone.
struct TrialAggregate {
  long trials = 0;
  long conditioned = 0;
  double conditioned_fraction = 0.0;
  double median_gap_lo = 0.0;
  double min_gap_lo = 0.0;
  double min_bound_slack = 0.0;  // min gap_pop_lo - bound_predicted
  double certificate_pass_rate = 0.0;
  double max_traj_dev = 0.0;

  bool operator==(const TrialAggregate&) const = default;
};

TrialAggregate aggregate_rows(const std::vector<TrialRow>& rows);

extern const char* const kTrialCsvHeader;

void write_trials_csv(const std::filesystem::path& path, const std::vector<TrialRow>& rows);
std::vector<TrialRow> read_trials_csv(const std::filesystem::path& path);

/// t, feldman_zero, p_argmax_is_vSs, p_positive, projection_inactive, p_value,
/// p_margin, closed_form_dev, then the recorded iterate (code..., message...) if any.
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& rec);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Report {
  std::string command;
  LabConfig cfg;
  std::shared_ptr<const BinaryCode> code;
  std::vector<TrialRow> rows;
  std::vector<CriterionResult> criteria;
  std::optional<SweepResult> sweep;
  std::map<std::string, double> metrics;

  bool all_pass() const;
};

/// Writes trials.csv, aggregate.json and summary.txt into out_dir (created if
/// missing). IO failures throw std::runtime_error naming the path.
void emit_report(const Report& report, const std::filesystem::path& out_dir);

std::string summary_text(const Report& report);

}  // namespace scolab

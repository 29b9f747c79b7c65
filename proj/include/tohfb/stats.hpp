#pragma once
// Success rates, percentage-score quantiles, per-trial means and the
// two-sample t-test used to compare conditions.

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "tohfb/trajectory.hpp"

namespace tohfb::stats {

/// Linear interpolation between order statistics (type 7). Throws
/// EmptyDataset.
double quantile(std::span<const double> sorted, double p);

struct Quantiles {
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

Quantiles quantiles(std::span<const double> values);

struct TTest {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  bool welch = false;
};

/// Pooled-variance two-sample t with a two-sided p; Welch's variant on
/// request. Throws DegenerateSample for n < 2 or zero variance.
TTest two_sample_t_test(std::span<const double> a, std::span<const double> b, bool welch = false);

struct GroupSummary {
  Condition condition = Condition::NoFeedback;
  Phase phase = Phase::Training;
  std::size_t trials = 0;
  std::size_t solved = 0;
  double success_rate = 0.0;  // percent
  Quantiles pct;
  std::vector<double> trial_means;  // indexed by trial within the phase, from 1
  std::vector<std::size_t> trial_counts;
};

struct StatsBundle {
  std::vector<GroupSummary> groups;  // condition order, then training before transfer
};

/// Throws EmptyDataset when nothing survives the selectors.
StatsBundle summarize(const std::vector<TrajectoryRecord>& records,
                      std::optional<Condition> condition = std::nullopt,
                      std::optional<Phase> phase = std::nullopt);

std::vector<double> percentage_scores(const std::vector<TrajectoryRecord>& records);

nlohmann::json to_json(const StatsBundle& bundle);
nlohmann::json to_json(const TTest& test);
/// condition,phase,trials,solved,success_rate,min,q25,median,q75,max
void write_summary_csv(std::ostream& out, const StatsBundle& bundle);
/// condition,phase,trial,count,mean_pct
void write_trial_means_csv(std::ostream& out, const StatsBundle& bundle);

}  // namespace tohfb::stats

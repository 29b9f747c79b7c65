#include "tohfb/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "tohfb/errors.hpp"

namespace tohfb::stats {

double quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) fail(ErrorCode::EmptyDataset, "quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "quantile level must lie in [0, 1]");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Quantiles quantiles(std::span<const double> values) {
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  return {quantile(s, 0.0), quantile(s, 0.25), quantile(s, 0.5), quantile(s, 0.75), quantile(s, 1.0)};
}

namespace {

std::pair<double, double> mean_var(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, ss / (n - 1.0)};
}

}  // namespace

TTest two_sample_t_test(std::span<const double> a, std::span<const double> b, bool welch) {
  if (a.size() < 2 || b.size() < 2)
    fail(ErrorCode::DegenerateSample, "each sample needs at least two values");
  const auto [ma, va] = mean_var(a);
  const auto [mb, vb] = mean_var(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  TTest r;
  r.welch = welch;
  double se2 = 0.0;
  if (welch) {
    se2 = va / na + vb / nb;
    if (!(se2 > 0.0)) fail(ErrorCode::DegenerateSample, "both samples have zero variance");
    r.df = se2 * se2 / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
  } else {
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    if (!(pooled > 0.0)) fail(ErrorCode::DegenerateSample, "pooled variance is zero");
    se2 = pooled * (1.0 / na + 1.0 / nb);
    r.df = na + nb - 2.0;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

std::vector<double> percentage_scores(const std::vector<TrajectoryRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.pct);
  return out;
}

StatsBundle summarize(const std::vector<TrajectoryRecord>& records, std::optional<Condition> condition,
                      std::optional<Phase> phase) {
  StatsBundle out;
  for (auto c : kAllConditions) {
    if (condition && *condition != c) continue;
    for (auto ph : {Phase::Training, Phase::Transfer}) {
      if (phase && *phase != ph) continue;
      GroupSummary g;
      g.condition = c;
      g.phase = ph;
      std::vector<double> pct;
      std::vector<double> sums;
      for (const auto& r : records) {
        if (r.condition != c || r.phase != ph) continue;
        ++g.trials;
        if (r.solved) ++g.solved;
        pct.push_back(r.pct);
        const auto t = static_cast<std::size_t>(std::max(trial_in_phase(r), 1));
        if (sums.size() < t) {
          sums.resize(t, 0.0);
          g.trial_counts.resize(t, 0);
        }
        sums[t - 1] += r.pct;
        ++g.trial_counts[t - 1];
      }
      if (g.trials == 0) continue;
      g.success_rate = 100.0 * static_cast<double>(g.solved) / static_cast<double>(g.trials);
      g.pct = quantiles(pct);
      g.trial_means.resize(sums.size(), 0.0);
      for (std::size_t i = 0; i < sums.size(); ++i)
        if (g.trial_counts[i] > 0) g.trial_means[i] = sums[i] / static_cast<double>(g.trial_counts[i]);
      out.groups.push_back(std::move(g));
    }
  }
  if (out.groups.empty()) fail(ErrorCode::EmptyDataset, "no records match the selection");
  return out;
}

nlohmann::json to_json(const StatsBundle& bundle) {
  using nlohmann::json;
  json groups = json::array();
  for (const auto& g : bundle.groups) {
    groups.push_back({{"condition", std::string(to_string(g.condition))},
                      {"phase", std::string(to_string(g.phase))},
                      {"trials", g.trials},
                      {"solved", g.solved},
                      {"success_rate", g.success_rate},
                      {"pct_quantiles",
                       {{"min", g.pct.min},
                        {"q25", g.pct.q25},
                        {"median", g.pct.median},
                        {"q75", g.pct.q75},
                        {"max", g.pct.max}}},
                      {"trial_means", g.trial_means},
                      {"trial_counts", g.trial_counts}});
  }
  return json{{"groups", std::move(groups)}};
}

nlohmann::json to_json(const TTest& t) {
  return {{"t", t.t}, {"p", t.p}, {"df", t.df}, {"welch", t.welch}};
}

void write_summary_csv(std::ostream& out, const StatsBundle& bundle) {
  out << "condition,phase,trials,solved,success_rate,min,q25,median,q75,max\n" << std::setprecision(10);
  for (const auto& g : bundle.groups) {
    out << to_string(g.condition) << ',' << to_string(g.phase) << ',' << g.trials << ',' << g.solved
        << ',' << g.success_rate << ',' << g.pct.min << ',' << g.pct.q25 << ',' << g.pct.median << ','
        << g.pct.q75 << ',' << g.pct.max << '\n';
  }
}

void write_trial_means_csv(std::ostream& out, const StatsBundle& bundle) {
  out << "condition,phase,trial,count,mean_pct\n" << std::setprecision(10);
  for (const auto& g : bundle.groups)
    for (std::size_t i = 0; i < g.trial_means.size(); ++i)
      out << to_string(g.condition) << ',' << to_string(g.phase) << ',' << i + 1 << ','
          << g.trial_counts[i] << ',' << g.trial_means[i] << '\n';
}

}  // namespace tohfb::stats

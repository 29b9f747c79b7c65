#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "tohfb/errors.hpp"
#include "tohfb/stats.hpp"

using namespace tohfb;

namespace {

TrajectoryRecord fake(Condition c, int trial, bool solved, int used) {
  TrajectoryRecord r;
  r.condition = c;
  r.trial_index = trial;
  r.phase = trial <= 10 ? Phase::Training : Phase::Transfer;
  r.n = trial <= 10 ? 4 : 5;
  r.m_min = trial <= 10 ? 15 : 31;
  r.m_allowed = allowed_moves(r.m_min);
  r.m_used = solved ? used : r.m_allowed;
  r.solved = solved;
  r.pct = percentage_score(r.m_allowed, r.m_used, r.m_min, solved);
  return r;
}

}  // namespace

TEST_CASE("quantiles interpolate between order statistics") {
  std::vector<double> v{3, 1, 4, 1, 5, 9, 2, 6};
  const auto q = stats::quantiles(v);
  CHECK(q.min == 1.0);
  CHECK(q.q25 == doctest::Approx(1.75));
  CHECK(q.median == doctest::Approx(3.5));
  CHECK(q.q75 == doctest::Approx(5.25));
  CHECK(q.max == 9.0);
  std::sort(v.begin(), v.end());
  CHECK(stats::quantile(v, 0.0) == 1.0);
  CHECK(stats::quantile(v, 1.0) == 9.0);
  const std::vector<double> one{7.0};
  CHECK(stats::quantile(one, 0.3) == 7.0);
  CHECK_THROWS_AS(stats::quantile(std::vector<double>{}, 0.5), Error);
  CHECK_THROWS_AS(stats::quantile(v, 1.5), Error);
}

TEST_CASE("t-test fixtures") {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 6, 8, 10, 12};
  const auto pooled = stats::two_sample_t_test(a, b);
  CHECK(pooled.t == doctest::Approx(-2.215646837627989).epsilon(1e-9));
  CHECK(pooled.p == doctest::Approx(0.05394592050940708).epsilon(1e-6));
  CHECK(pooled.df == 9.0);
  CHECK_FALSE(pooled.welch);
  const auto welch = stats::two_sample_t_test(a, b, true);
  CHECK(welch.t == doctest::Approx(-2.3763541031440183).epsilon(1e-9));
  CHECK(welch.df == doctest::Approx(6.972255729794934).epsilon(1e-9));
  CHECK(welch.p == doctest::Approx(0.04928433820673049).epsilon(1e-6));
  CHECK(welch.welch);
  // Swapping the samples flips the sign only.
  const auto swapped = stats::two_sample_t_test(b, a);
  CHECK(swapped.t == doctest::Approx(-pooled.t));
  CHECK(swapped.p == doctest::Approx(pooled.p));

  const std::vector<double> flat{2, 2, 2};
  try {
    stats::two_sample_t_test(flat, flat);
    FAIL("expected DegenerateSample");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateSample);
  }
  CHECK_THROWS_AS(stats::two_sample_t_test(std::vector<double>{1.0}, a), Error);
}

TEST_CASE("summaries group by condition and phase") {
  std::vector<TrajectoryRecord> recs;
  for (Condition c : {Condition::Numeric, Condition::NoFeedback})
    for (int agent = 0; agent < 3; ++agent)
      for (int t = 1; t <= 15; ++t) recs.push_back(fake(c, t, (t + agent) % 3 != 0, t <= 10 ? 15 + agent : 31));

  const auto all = stats::summarize(recs);
  REQUIRE(all.groups.size() == 4);
  CHECK(all.groups[0].condition == Condition::NoFeedback);
  CHECK(all.groups[0].phase == Phase::Training);
  CHECK(all.groups[1].phase == Phase::Transfer);
  CHECK(all.groups[2].condition == Condition::Numeric);
  for (const auto& g : all.groups) {
    CHECK(g.trials == (g.phase == Phase::Training ? 30u : 15u));
    CHECK(g.success_rate == doctest::Approx(100.0 * static_cast<double>(g.solved) / static_cast<double>(g.trials)));
    CHECK(g.trial_means.size() == (g.phase == Phase::Training ? 10u : 5u));
    for (auto n : g.trial_counts) CHECK(n == 3u);
    CHECK(g.pct.min <= g.pct.median);
  }

  const auto tr = stats::summarize(recs, Condition::Numeric, Phase::Transfer);
  REQUIRE(tr.groups.size() == 1);
  // Transfer trial 1 is trial_index 11.
  double expect = 0.0;
  for (const auto& r : recs)
    if (r.condition == Condition::Numeric && r.trial_index == 11) expect += r.pct / 3.0;
  CHECK(tr.groups[0].trial_means[0] == doctest::Approx(expect));

  CHECK_THROWS_AS(stats::summarize(recs, Condition::Optional), Error);

  std::ostringstream s, m;
  stats::write_summary_csv(s, all);
  stats::write_trial_means_csv(m, all);
  CHECK(s.str().rfind("condition,phase,trials,solved,success_rate,min,q25,median,q75,max\n", 0) == 0);
  CHECK(m.str().rfind("condition,phase,trial,count,mean_pct\n", 0) == 0);
  const auto text = m.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 15);
  const auto j = stats::to_json(all);
  CHECK(j["groups"].size() == 4);
  CHECK(stats::percentage_scores(recs).size() == recs.size());
}

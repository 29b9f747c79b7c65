#include <sstream>

#include "doctest.h"
#include "tohfb/errors.hpp"
#include "tohfb/trajectory.hpp"

using namespace tohfb;

namespace {

// Optimal 3-disk solve 000 -> 222 under the numeric condition.
TrajectoryRecord sample_record() {
  TrajectoryRecord r;
  r.session_id = "s-1";
  r.condition = Condition::Numeric;
  r.trial_index = 3;
  r.n = 3;
  r.start = TohState::parse("000");
  r.target = TohState::parse("222");
  const auto g = shared_graph(3);
  const auto values = tutor_values(g, r.target);
  const auto d = shortest_distances(*g, r.target);
  TohState cur = r.start;
  int t = 0;
  while (cur != r.target) {
    for (const auto& tr : legal_moves(cur))
      if (d[g->index_of(tr.next)] < d[g->index_of(cur)]) {
        MoveRecord m;
        m.pre = cur;
        m.action = tr.action;
        m.post = tr.next;
        m.t = ++t;
        const auto ev = evaluate_move(values, *g, cur, tr.next);
        m.label = ev.label;
        m.delta = ev.delta;
        r.moves.push_back(m);
        cur = tr.next;
        break;
      }
  }
  r.m_min = 7;
  r.m_allowed = allowed_moves(7);
  r.m_used = static_cast<int>(r.moves.size());
  r.solved = true;
  r.score = rescore(r);
  r.pct = percentage_score(r.m_allowed, r.m_used, r.m_min, true);
  return r;
}

}  // namespace

TEST_CASE("record json round trip is lossless") {
  auto r = sample_record();
  r.subgoal = TohState::parse("110");
  r.moves[1].requested = true;
  r.moves[1].requests = 2;
  const auto j = to_json(r);
  for (const char* key : {"session_id", "condition", "trial_index", "phase", "n", "start", "target", "subgoal",
                          "moves", "m_min", "m_allowed", "m_used", "solved", "score", "pct"})
    CHECK(j.contains(key));
  for (const char* key : {"pre", "from", "to", "post", "t", "label", "requested"}) CHECK(j["moves"][0].contains(key));
  const auto back = record_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(back.moves[1].requests == 2);
  CHECK(back.subgoal == r.subgoal);

  std::stringstream ss;
  write_jsonl(ss, {r, r});
  const auto all = read_jsonl(ss);
  REQUIRE(all.size() == 2);
  CHECK(to_json(all[1]) == j);
}

TEST_CASE("scores recompute from the raw moves") {
  const auto r = sample_record();
  CHECK(r.score.base == 10 * (11 - 7 + 1));
  CHECK(r.score.feedback_bonus == 14);
  CHECK(r.score.total == 64);
  CHECK(r.pct == 100.0);
  const auto in = score_inputs_from_moves(r);
  CHECK(in.m_good == 7);
  CHECK(in.m_bad == 0);
  validate_record(r);
}

TEST_CASE("validation catches broken records") {
  auto r = sample_record();
  r.moves[2].pre = TohState::parse("111");
  CHECK_THROWS_AS(validate_record(r), Error);
  r = sample_record();
  r.m_used = 6;
  CHECK_THROWS_AS(validate_record(r), Error);
  r = sample_record();
  r.solved = false;
  CHECK_THROWS_AS(validate_record(r), Error);
}

TEST_CASE("malformed json is a parse error") {
  std::stringstream ss("{\"session_id\": 5}\n");
  try {
    read_jsonl(ss);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
  std::stringstream junk("not json\n");
  CHECK_THROWS_AS(read_jsonl(junk), Error);
  CHECK_THROWS_AS(read_jsonl(std::filesystem::path("/nonexistent/file.jsonl")), Error);
}

TEST_CASE("dataset filters") {
  std::vector<TrajectoryRecord> recs;
  for (int i = 1; i <= 15; ++i) {
    auto r = sample_record();
    r.trial_index = i;
    r.phase = i <= 10 ? Phase::Training : Phase::Transfer;
    r.solved = i % 2 == 0;
    r.condition = i % 3 == 0 ? Condition::Optional : Condition::Numeric;
    recs.push_back(r);
  }
  const auto mid = filter_trials(filter_phase(recs, Phase::Training), 6, 10);
  REQUIRE(mid.size() == 5);
  CHECK(mid.front().trial_index == 6);
  CHECK(filter_trials(filter_phase(recs, Phase::Transfer), 1, 2).front().trial_index == 11);
  CHECK(filter_solved(recs).size() == 7);
  CHECK(filter_condition(recs, Condition::Optional).size() == 5);
  CHECK(trial_in_phase(recs[12]) == 3);
  CHECK(parse_phase("transfer") == Phase::Transfer);
  CHECK_THROWS_AS(parse_phase("warmup"), Error);
}

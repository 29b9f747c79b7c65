#include <filesystem>

#include "doctest.h"
#include "tohfb/service.hpp"

using namespace tohfb;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

MoveAction improving_move(const TohState& board, const TohState& target) {
  const auto g = shared_graph(board.disks());
  const auto d = shortest_distances(*g, target);
  for (const auto& tr : legal_moves(board))
    if (d[g->index_of(tr.next)] < d[g->index_of(board)]) return tr.action;
  FAIL("no improving move");
  return {};
}

// Plays the current trial optimally.
void solve_current(service::SessionManager& mgr, const std::string& id) {
  const auto view = mgr.session_view(id)["trial"];
  auto board = TohState::parse(view["state"].get<std::string>());
  const auto target = TohState::parse(view["target"].get<std::string>());
  for (;;) {
    const auto mv = improving_move(board, target);
    const auto out = mgr.submit_move(id, mv.from, mv.to);
    board = TohState::parse(out["state"].get<std::string>());
    if (out["trial_complete"].get<bool>()) break;
  }
}

}  // namespace

TEST_CASE("trial plans") {
  CHECK(service::phase_of_trial(10) == Phase::Training);
  CHECK(service::phase_of_trial(11) == Phase::Transfer);
  CHECK_THROWS_AS(service::phase_of_trial(16), Error);
  CHECK(service::effective_condition(Condition::Numeric, Phase::Transfer) == Condition::NoFeedback);
  CHECK(service::effective_condition(Condition::Optional, Phase::Training) == Condition::Optional);
  Rng rng(3);
  const auto a = service::plan_trial(Condition::SubgoalNumeric, 2, rng);
  CHECK(a.n == 4);
  CHECK(a.start.str() == "0000");
  CHECK(triangle_of(a.target) != Triangle::T1);
  CHECK(a.m_allowed == allowed_moves(a.m_min));
  REQUIRE(a.subgoal);
  CHECK(*a.subgoal == subgoal_for(a.target, 4));
  const auto b = service::plan_trial(Condition::SubgoalNumeric, 12, rng);
  CHECK(b.n == 5);
  CHECK_FALSE(b.subgoal);
  CHECK(b.max_score == max_possible_score(Condition::NoFeedback, b.m_min, b.m_allowed));
}

TEST_CASE("moves are adjudicated") {
  service::SessionManager mgr;
  const std::string id = mgr.create_session("numeric", 7)["session_id"];
  CHECK(code_of([&] { mgr.submit_move(id, 1, 2); }) == ErrorCode::IllegalMove);
  CHECK(code_of([&] { mgr.submit_move(id, 0, 0); }) == ErrorCode::IllegalMove);
  CHECK(code_of([&] { mgr.submit_move(id, 0, 3); }) == ErrorCode::IllegalMove);
  CHECK(mgr.session_view(id)["trial"]["state"] == "0000");
  CHECK(mgr.session_view(id)["trial"]["m_used"] == 0);
  const auto trial = mgr.session_view(id)["trial"];
  const int m_min = trial["m_min"], allowed = trial["m_allowed"];
  CHECK(trial["score"] == 10 * (allowed - m_min + 1));

  const auto out = mgr.submit_move(id, 0, 1);
  CHECK(out["state"] == "1000");
  CHECK(out.contains("label"));
  CHECK(out["trial_complete"] == false);
  CHECK(code_of([&] { mgr.advance(id); }) == ErrorCode::TrialInProgress);
  CHECK(code_of([&] { mgr.request_feedback(id); }) == ErrorCode::WrongCondition);
  CHECK(code_of([&] { mgr.session_view("nope"); }) == ErrorCode::SessionNotFound);
  CHECK(code_of([&] { mgr.create_session("loud"); }) == ErrorCode::InvalidCondition);
}

TEST_CASE("the move budget ends a trial") {
  service::SessionManager mgr;
  const std::string id = mgr.create_session("no_feedback", 8)["session_id"];
  const int allowed = mgr.session_view(id)["trial"]["m_allowed"];
  nlohmann::json last;
  // Shuffle the smallest disk between pegs 0 and 1 until the budget runs out.
  for (int i = 0; i < allowed; ++i) last = mgr.submit_move(id, i % 2 == 0 ? 0 : 1, i % 2 == 0 ? 1 : 0);
  CHECK(last["trial_complete"] == true);
  CHECK(last["failed"] == true);
  CHECK(last["score"] == 0);
  CHECK_FALSE(last.contains("label"));
  CHECK(code_of([&] { mgr.submit_move(id, 0, 1); }) == ErrorCode::TrialNotActive);
  const auto recs = mgr.records(id);
  REQUIRE(recs.size() == 1);
  CHECK_FALSE(recs[0].solved);
  CHECK(recs[0].m_used == allowed);
  mgr.advance(id);
  CHECK(mgr.session_view(id)["trial"]["trial_index"] == 2);
}

TEST_CASE("feedback on request") {
  service::SessionManager mgr;
  const std::string id = mgr.create_session("optional", 9)["session_id"];
  CHECK(code_of([&] { mgr.request_feedback(id); }) == ErrorCode::NoMoveYet);
  const auto out = mgr.submit_move(id, 0, 1);
  CHECK_FALSE(out.contains("label"));
  mgr.request_feedback(id);
  const auto fb = mgr.request_feedback(id);
  CHECK(fb["f_optional"] == 2);
  CHECK(fb["label"].get<std::string>().find("move") != std::string::npos);
  solve_current(mgr, id);
  const auto rec = mgr.records(id).at(0);
  CHECK(rec.moves[0].requested);
  CHECK(rec.score.optional_penalty == 2);
}

TEST_CASE("sessions expire") {
  std::int64_t clock = 0;
  service::ServiceOptions opts;
  opts.clock = [&] { return clock; };
  opts.time_limit = std::chrono::milliseconds(1000);
  service::SessionManager mgr(opts);
  const std::string id = mgr.create_session("subgoal", 1)["session_id"];
  clock = 500;
  mgr.submit_move(id, 0, 1);
  clock = 1500;
  CHECK(code_of([&] { mgr.submit_move(id, 1, 2); }) == ErrorCode::SessionExpired);
  CHECK(mgr.session_view(id)["status"] == "expired");
  CHECK(code_of([&] { mgr.advance(id); }) == ErrorCode::SessionExpired);
}

TEST_CASE("a finished session persists and reloads") {
  const fs::path dir = fs::temp_directory_path() / "tohfb_service_test";
  fs::remove_all(dir);
  {
    service::ServiceOptions opts;
    opts.data_dir = dir;
    service::SessionManager mgr(opts);
    const std::string id = mgr.create_session("numeric", 11)["session_id"];
    for (int t = 1; t <= service::kTotalTrials; ++t) {
      solve_current(mgr, id);
      if (t < service::kTotalTrials) mgr.advance(id);
    }
    CHECK(mgr.session_view(id)["status"] == "finished");
    const auto recs = mgr.records(id);
    REQUIRE(recs.size() == 15);
    for (const auto& r : recs) {
      CHECK(r.solved);
      CHECK(r.pct == 100.0);
    }
    const auto st = mgr.stats(std::string("numeric"), std::string("training"));
    CHECK(st["groups"].size() == 1);
    CHECK(code_of([&] { mgr.stats(std::string("loud"), std::nullopt); }) == ErrorCode::InvalidCondition);
  }
  CHECK(fs::exists(dir / "trajectories.jsonl"));
  CHECK(fs::exists(dir / "sessions.jsonl"));
  service::ServiceOptions again;
  again.data_dir = dir;
  service::SessionManager reload(again);
  CHECK(reload.all_records().size() == 15);
  fs::remove_all(dir);
}

TEST_CASE("http status mapping") {
  CHECK(service::http_status(ErrorCode::SessionNotFound) == 404);
  CHECK(service::http_status(ErrorCode::SessionExpired) == 410);
  CHECK(service::http_status(ErrorCode::IllegalMove) == 409);
  CHECK(service::http_status(ErrorCode::NoMoveYet) == 409);
  CHECK(service::http_status(ErrorCode::InvalidCondition) == 400);
  CHECK(service::http_status(ErrorCode::IoError) == 500);
}

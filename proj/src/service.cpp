#include "tohfb/service.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>

#include "tohfb/stats.hpp"

namespace tohfb::service {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Phase phase_of_trial(int trial_index) {
  if (trial_index < 1 || trial_index > kTotalTrials)
    fail(ErrorCode::InvalidArgument, "trial index out of range");
  return trial_index <= kTrainingTrials ? Phase::Training : Phase::Transfer;
}

Condition effective_condition(Condition condition, Phase phase) {
  return phase == Phase::Training ? condition : Condition::NoFeedback;
}

TrialPlan plan_trial(Condition condition, int trial_index, Rng& rng) {
  TrialPlan p;
  p.trial_index = trial_index;
  p.phase = phase_of_trial(trial_index);
  p.effective = effective_condition(condition, p.phase);
  p.n = p.phase == Phase::Training ? kTrainingDisks : kTransferDisks;
  p.start = TohState::uniform(p.n, 0);
  p.target = sample_target(p.n, rng);
  if (shows_subgoal(p.effective)) p.subgoal = subgoal_for(p.target, p.n);
  const auto graph = shared_graph(p.n);
  p.m_min = shortest_distances(*graph, p.target)[graph->index_of(p.start)];
  p.m_allowed = allowed_moves(p.m_min);
  p.max_score = max_possible_score(p.effective, p.m_min, p.m_allowed);
  return p;
}

json to_json(const TrialPlan& p) {
  return json{{"trial_index", p.trial_index},
              {"phase", std::string(to_string(p.phase))},
              {"n", p.n},
              {"start", p.start.str()},
              {"target", p.target.str()},
              {"subgoal", p.subgoal ? json(p.subgoal->str()) : json(nullptr)},
              {"m_min", p.m_min},
              {"m_allowed", p.m_allowed},
              {"max_score", p.max_score},
              {"numeric_feedback", shows_numeric_feedback(p.effective)},
              {"feedback_button", offers_feedback_button(p.effective)}};
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Active: return "active";
    case SessionStatus::Finished: return "finished";
    case SessionStatus::Expired: return "expired";
  }
  return "?";
}

struct SessionManager::Session {
  std::mutex m;
  std::string id;
  Condition condition = Condition::NoFeedback;
  std::uint64_t seed = 0;
  Rng rng;
  std::int64_t created = 0;
  SessionStatus status = SessionStatus::Active;
  TrialPlan plan;
  bool in_progress = false;
  TohState board;
  std::vector<MoveRecord> moves;
  std::optional<ValueTable> tutor;
  std::vector<TrajectoryRecord> done;

  TrajectoryRecord record(bool solved) const {
    TrajectoryRecord r;
    r.session_id = id;
    r.condition = condition;
    r.trial_index = plan.trial_index;
    r.phase = plan.phase;
    r.n = plan.n;
    r.start = plan.start;
    r.target = plan.target;
    r.subgoal = plan.subgoal;
    r.moves = moves;
    r.m_min = plan.m_min;
    r.m_allowed = plan.m_allowed;
    r.m_used = static_cast<int>(moves.size());
    r.solved = solved;
    r.score = score_trial(plan.effective, score_inputs_from_moves(r), solved);
    r.pct = percentage_score(r.m_allowed, r.m_used, r.m_min, solved);
    return r;
  }

  // Running total: the base as if solved in the fewest moves still possible,
  // plus the bonuses and penalties earned so far.
  int running_score() const {
    auto in = score_inputs_from_moves(record(false));
    in.m_used = std::max(in.m_used, plan.m_min);
    const auto s = score_trial(plan.effective, in, true);
    return s.total;
  }
};

SessionManager::SessionManager(ServiceOptions options) : options_(std::move(options)) {
  if (options_.data_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(options_.data_dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + options_.data_dir.string());
  const auto traj = options_.data_dir / "trajectories.jsonl";
  if (std::filesystem::exists(traj)) archive_ = read_jsonl(traj);
  const auto index = options_.data_dir / "sessions.jsonl";
  if (std::filesystem::exists(index)) {
    std::ifstream in(index);
    std::string line;
    while (std::getline(in, line))
      if (line.find("\"created\"") != std::string::npos) ++counter_;
  }
}

SessionManager::~SessionManager() = default;

std::int64_t SessionManager::now() const {
  if (options_.clock) return options_.clock();
  using namespace std::chrono;
  return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

void SessionManager::append(const std::filesystem::path& file, const json& line) {
  if (options_.data_dir.empty()) return;
  const std::string text = line.dump() + "\n";
  std::lock_guard lock(file_mutex_);
  std::ofstream out(options_.data_dir / file, std::ios::binary | std::ios::app);
  if (!out) fail(ErrorCode::IoError, "cannot append to " + (options_.data_dir / file).string());
  out << text;
  out.flush();
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::SessionNotFound, "no session '" + id + "'");
  return it->second;
}

void SessionManager::check_expiry(Session& s) {
  if (s.status == SessionStatus::Active && now() - s.created > options_.time_limit.count()) {
    s.status = SessionStatus::Expired;
    s.in_progress = false;
    append("sessions.jsonl", {{"session_id", s.id}, {"status", "expired"}});
  }
  if (s.status == SessionStatus::Expired)
    fail(ErrorCode::SessionExpired, "session " + s.id + " passed its time limit");
}

void SessionManager::start_trial(Session& s) {
  s.plan = plan_trial(s.condition, s.plan.trial_index, s.rng);
  s.board = s.plan.start;
  s.moves.clear();
  s.in_progress = true;
  s.tutor.reset();
  if (shows_numeric_feedback(s.plan.effective) || offers_feedback_button(s.plan.effective))
    s.tutor = tutor_values(shared_graph(s.plan.n), s.plan.target);
}

void SessionManager::finish_trial(Session& s, bool solved) {
  auto rec = s.record(solved);
  append("trajectories.jsonl", to_json(rec));
  {
    std::lock_guard lock(mutex_);
    archive_.push_back(rec);
  }
  s.done.push_back(std::move(rec));
  s.in_progress = false;
  if (s.plan.trial_index == kTotalTrials) {
    s.status = SessionStatus::Finished;
    append("sessions.jsonl", {{"session_id", s.id}, {"status", "finished"}});
  }
}

json SessionManager::trial_view(const Session& s) const {
  json j = to_json(s.plan);
  j["state"] = s.board.str();
  j["m_used"] = static_cast<int>(s.moves.size());
  j["score"] = s.running_score();
  j["in_progress"] = s.in_progress;
  return j;
}

json SessionManager::view(const Session& s) const {
  json done = json::array();
  for (const auto& r : s.done) done.push_back(to_json(r));
  return json{{"session_id", s.id},
              {"condition", std::string(to_string(s.condition))},
              {"status", std::string(to_string(s.status))},
              {"trial", trial_view(s)},
              {"completed", std::move(done)},
              {"elapsed_ms", now() - s.created},
              {"time_limit_ms", options_.time_limit.count()}};
}

json SessionManager::create_session(std::string_view condition, std::optional<std::uint64_t> seed) {
  const Condition c = parse_condition(condition);
  auto s = std::make_shared<Session>();
  std::uint64_t n;
  {
    std::lock_guard lock(mutex_);
    n = ++counter_;
  }
  s->seed = seed ? *seed : splitmix64(options_.seed ^ splitmix64(n));
  s->rng.seed(s->seed);
  char id[40];
  std::snprintf(id, sizeof id, "s%05" PRIu64 "-%08" PRIx64, n, static_cast<std::uint64_t>(splitmix64(s->seed) & 0xffffffffU));
  s->id = id;
  s->condition = c;
  s->created = now();
  s->plan.trial_index = 1;
  start_trial(*s);
  {
    std::lock_guard lock(mutex_);
    sessions_[s->id] = s;
  }
  append("sessions.jsonl", {{"session_id", s->id},
                            {"condition", std::string(to_string(c))},
                            {"seed", s->seed},
                            {"created", s->created},
                            {"status", "active"}});
  const std::lock_guard lock(s->m);
  return json{{"session_id", s->id}, {"condition", std::string(to_string(c))}, {"trial", trial_view(*s)}};
}

json SessionManager::session_view(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->m);
  if (s->status == SessionStatus::Active && now() - s->created > options_.time_limit.count()) {
    s->status = SessionStatus::Expired;
    s->in_progress = false;
    append("sessions.jsonl", {{"session_id", s->id}, {"status", "expired"}});
  }
  return view(*s);
}

json SessionManager::submit_move(const std::string& id, int from, int to) {
  auto s = find(id);
  std::lock_guard lock(s->m);
  check_expiry(*s);
  if (!s->in_progress) fail(ErrorCode::TrialNotActive, "no trial in progress");
  const bool pegs_ok = from >= 0 && from < kPegs && to >= 0 && to < kPegs && from != to;
  TohState next;
  try {
    if (!pegs_ok) fail(ErrorCode::IllegalMove, "pegs must be distinct and in 0..2");
    next = apply_move(s->board, MoveAction{from, to});
  } catch (const Error& e) {
    if (e.code() != ErrorCode::IllegalMove) throw;
    append("events.jsonl", {{"session_id", s->id},
                            {"event", "illegal_move"},
                            {"trial_index", s->plan.trial_index},
                            {"state", s->board.str()},
                            {"from", from},
                            {"to", to},
                            {"t", now() - s->created}});
    throw;
  }
  MoveRecord m;
  m.pre = s->board;
  m.action = MoveAction{from, to};
  m.post = next;
  m.t = static_cast<double>(now() - s->created);
  json out;
  if (shows_numeric_feedback(s->plan.effective)) {
    const auto graph = shared_graph(s->plan.n);
    const auto ev = evaluate_edge(*s->tutor, graph->index_of(m.pre), graph->index_of(m.post));
    m.label = ev.label;
    m.delta = ev.delta;
    out["label"] = ev.label;
  }
  s->moves.push_back(std::move(m));
  s->board = next;
  const bool solved = s->board == s->plan.target;
  const bool failed = !solved && static_cast<int>(s->moves.size()) >= s->plan.m_allowed;
  out["state"] = s->board.str();
  out["m_used"] = static_cast<int>(s->moves.size());
  out["m_allowed"] = s->plan.m_allowed;
  out["score"] = s->running_score();
  out["solved"] = solved;
  out["failed"] = failed;
  out["subgoal_reached"] = s->plan.subgoal && score_inputs_from_moves(s->record(false)).subgoal_reached;
  if (solved || failed) {
    finish_trial(*s, solved);
    out["trial_complete"] = true;
    out["record"] = to_json(s->done.back());
    out["score"] = s->done.back().score.total;
    out["pct"] = s->done.back().pct;
    out["status"] = std::string(to_string(s->status));
  } else {
    out["trial_complete"] = false;
  }
  return out;
}

json SessionManager::request_feedback(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->m);
  check_expiry(*s);
  if (!offers_feedback_button(s->condition))
    fail(ErrorCode::WrongCondition, "feedback on request is only offered in the optional condition");
  if (!s->in_progress) fail(ErrorCode::TrialNotActive, "no trial in progress");
  if (!offers_feedback_button(s->plan.effective))
    fail(ErrorCode::WrongCondition, "no feedback during transfer trials");
  if (s->moves.empty()) fail(ErrorCode::NoMoveYet, "no move to evaluate yet");
  auto& last = s->moves.back();
  const auto graph = shared_graph(s->plan.n);
  const auto ev = evaluate_edge(*s->tutor, graph->index_of(last.pre), graph->index_of(last.post));
  last.requested = true;
  ++last.requests;
  last.label = ev.label;
  last.delta = ev.delta;
  const auto inputs = score_inputs_from_moves(s->record(false));
  return json{{"label", ev.label},
              {"f_optional", inputs.f_optional},
              {"score", s->running_score()}};
}

json SessionManager::advance(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->m);
  check_expiry(*s);
  if (s->status == SessionStatus::Finished) return view(*s);
  if (s->in_progress) fail(ErrorCode::TrialInProgress, "finish the current trial first");
  ++s->plan.trial_index;
  start_trial(*s);
  return json{{"session_id", s->id}, {"status", "active"}, {"trial", trial_view(*s)}};
}

json SessionManager::stats(std::optional<std::string> condition, std::optional<std::string> phase) {
  std::optional<Condition> c;
  std::optional<Phase> p;
  if (condition && !condition->empty()) c = parse_condition(*condition);
  try {
    if (phase && !phase->empty()) p = parse_phase(*phase);
  } catch (const Error& e) {
    fail(ErrorCode::InvalidArgument, e.what());
  }
  return stats::to_json(stats::summarize(all_records(), c, p));
}

std::vector<TrajectoryRecord> SessionManager::records(const std::string& id) {
  auto s = find(id);
  std::lock_guard lock(s->m);
  return s->done;
}

std::vector<TrajectoryRecord> SessionManager::all_records() {
  std::lock_guard lock(mutex_);
  return archive_;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::SessionNotFound:
    case ErrorCode::EmptyDataset: return 404;
    case ErrorCode::SessionExpired: return 410;
    case ErrorCode::IllegalMove:
    case ErrorCode::TrialNotActive:
    case ErrorCode::TrialInProgress:
    case ErrorCode::WrongCondition:
    case ErrorCode::NoMoveYet: return 409;
    case ErrorCode::IoError:
    case ErrorCode::NonConvergence: return 500;
    default: return 400;
  }
}

}  // namespace tohfb::service

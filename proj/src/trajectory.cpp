#include "tohfb/trajectory.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "tohfb/errors.hpp"

namespace tohfb {

using nlohmann::json;

std::string_view to_string(Phase p) { return p == Phase::Training ? "training" : "transfer"; }

Phase parse_phase(std::string_view name) {
  if (name == "training") return Phase::Training;
  if (name == "transfer") return Phase::Transfer;
  fail(ErrorCode::ParseError, "unknown phase '" + std::string(name) + "'");
}

json to_json(const TrajectoryRecord& r) {
  json moves = json::array();
  for (const auto& m : r.moves) {
    moves.push_back({{"pre", m.pre.str()},
                     {"from", m.action.from},
                     {"to", m.action.to},
                     {"post", m.post.str()},
                     {"t", m.t},
                     {"label", m.label ? json(*m.label) : json(nullptr)},
                     {"requested", m.requested},
                     {"requests", m.requests},
                     {"delta", m.delta ? json(std::string(to_string(*m.delta))) : json(nullptr)}});
  }
  return json{{"session_id", r.session_id},
              {"condition", std::string(to_string(r.condition))},
              {"trial_index", r.trial_index},
              {"phase", std::string(to_string(r.phase))},
              {"n", r.n},
              {"start", r.start.str()},
              {"target", r.target.str()},
              {"subgoal", r.subgoal ? json(r.subgoal->str()) : json(nullptr)},
              {"moves", std::move(moves)},
              {"m_min", r.m_min},
              {"m_allowed", r.m_allowed},
              {"m_used", r.m_used},
              {"solved", r.solved},
              {"score",
               {{"base", r.score.base},
                {"feedback_bonus", r.score.feedback_bonus},
                {"optional_penalty", r.score.optional_penalty},
                {"subgoal_bonus", r.score.subgoal_bonus},
                {"total", r.score.total}}},
              {"pct", r.pct}};
}

TrajectoryRecord record_from_json(const json& j) {
  try {
    TrajectoryRecord r;
    r.session_id = j.at("session_id").get<std::string>();
    r.condition = parse_condition(j.at("condition").get<std::string>());
    r.trial_index = j.at("trial_index").get<int>();
    r.phase = parse_phase(j.at("phase").get<std::string>());
    r.n = j.at("n").get<int>();
    r.start = TohState::parse(j.at("start").get<std::string>(), r.n);
    r.target = TohState::parse(j.at("target").get<std::string>(), r.n);
    if (!j.at("subgoal").is_null())
      r.subgoal = TohState::parse(j.at("subgoal").get<std::string>(), r.n);
    for (const auto& m : j.at("moves")) {
      MoveRecord mv;
      mv.pre = TohState::parse(m.at("pre").get<std::string>(), r.n);
      mv.action = MoveAction{m.at("from").get<int>(), m.at("to").get<int>()};
      mv.post = TohState::parse(m.at("post").get<std::string>(), r.n);
      mv.t = m.at("t").get<double>();
      if (!m.at("label").is_null()) mv.label = m.at("label").get<std::string>();
      mv.requested = m.at("requested").get<bool>();
      mv.requests = m.contains("requests") ? m.at("requests").get<int>() : (mv.requested ? 1 : 0);
      if (m.contains("delta") && !m.at("delta").is_null())
        mv.delta = parse_delta(m.at("delta").get<std::string>());
      r.moves.push_back(std::move(mv));
    }
    r.m_min = j.at("m_min").get<int>();
    r.m_allowed = j.at("m_allowed").get<int>();
    r.m_used = j.at("m_used").get<int>();
    r.solved = j.at("solved").get<bool>();
    const auto& s = j.at("score");
    r.score = {s.at("base").get<int>(), s.at("feedback_bonus").get<int>(),
               s.at("optional_penalty").get<int>(), s.at("subgoal_bonus").get<int>(),
               s.at("total").get<int>()};
    r.pct = j.at("pct").get<double>();
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed trajectory record: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, std::string("malformed trajectory record: ") + e.what());
  }
}

void write_jsonl(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void write_jsonl(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  write_jsonl(out, records);
}

std::vector<TrajectoryRecord> read_jsonl(std::istream& in) {
  std::vector<TrajectoryRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(record_from_json(j));
  }
  return out;
}

std::vector<TrajectoryRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  return read_jsonl(in);
}

ScoreInputs score_inputs_from_moves(const TrajectoryRecord& r) {
  ScoreInputs in;
  in.m_allowed = r.m_allowed;
  in.m_used = static_cast<int>(r.moves.size());
  for (const auto& m : r.moves) {
    if (m.label && *m.label == kGoodLabel && !m.requested) ++in.m_good;
    if (m.label && *m.label == kBadLabel && !m.requested) ++in.m_bad;
    in.f_optional += m.requests;
    if (r.subgoal && m.post == *r.subgoal) in.subgoal_reached = true;
  }
  return in;
}

ScoreBreakdown rescore(const TrajectoryRecord& r) {
  const bool solved = !r.moves.empty() && r.moves.back().post == r.target &&
                      static_cast<int>(r.moves.size()) <= r.m_allowed;
  return score_trial(r.condition, score_inputs_from_moves(r), solved);
}

void validate_record(const TrajectoryRecord& r) {
  TohState cur = r.start;
  for (std::size_t i = 0; i < r.moves.size(); ++i) {
    const auto& m = r.moves[i];
    if (m.pre != cur) fail(ErrorCode::InvalidState, "move " + std::to_string(i) + " does not chain");
    if (apply_move(m.pre, m.action) != m.post)
      fail(ErrorCode::InvalidState, "move " + std::to_string(i) + " has the wrong post-state");
    cur = m.post;
    if (cur == r.target && i + 1 != r.moves.size())
      fail(ErrorCode::InvalidState, "moves continue past the target");
  }
  if (r.m_used != static_cast<int>(r.moves.size()))
    fail(ErrorCode::InvalidState, "m_used disagrees with the move list");
  const bool solved = cur == r.target && r.m_used <= r.m_allowed;
  if (solved != r.solved) fail(ErrorCode::InvalidState, "solved flag disagrees with the moves");
}

std::vector<TrajectoryRecord> filter_trials(const std::vector<TrajectoryRecord>& records,
                                            int first, int last) {
  std::vector<TrajectoryRecord> out;
  for (const auto& r : records) {
    const int t = trial_in_phase(r);
    if (t >= first && t <= last) out.push_back(r);
  }
  return out;
}

std::vector<TrajectoryRecord> filter_solved(const std::vector<TrajectoryRecord>& records) {
  std::vector<TrajectoryRecord> out;
  for (const auto& r : records)
    if (r.solved) out.push_back(r);
  return out;
}

std::vector<TrajectoryRecord> filter_phase(const std::vector<TrajectoryRecord>& records, Phase p) {
  std::vector<TrajectoryRecord> out;
  for (const auto& r : records)
    if (r.phase == p) out.push_back(r);
  return out;
}

std::vector<TrajectoryRecord> filter_condition(const std::vector<TrajectoryRecord>& records,
                                               Condition c) {
  std::vector<TrajectoryRecord> out;
  for (const auto& r : records)
    if (r.condition == c) out.push_back(r);
  return out;
}

int trial_in_phase(const TrajectoryRecord& r, int training_trials) {
  return r.phase == Phase::Training ? r.trial_index : r.trial_index - training_trials;
}

}  // namespace tohfb

#pragma once
// One trial's move log: the unit shared by the experiment service, the
// synthetic agents and every analysis. Serialized as one JSON object per line.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tohfb/feedback.hpp"
#include "tohfb/toh.hpp"

namespace tohfb {

enum class Phase { Training, Transfer };

std::string_view to_string(Phase p);
Phase parse_phase(std::string_view name);

struct MoveRecord {
  TohState pre;
  MoveAction action;
  TohState post;
  double t = 0.0;                     // ms since session start, or step counter
  std::optional<std::string> label;  // evaluation text shown, if any
  bool requested = false;            // feedback requested after this move
  int requests = 0;                  // button presses for this move
  std::optional<DeltaClass> delta;   // three-way class behind the label
};

struct TrajectoryRecord {
  std::string session_id;
  Condition condition = Condition::NoFeedback;
  int trial_index = 1;  // 1-based over the whole protocol
  Phase phase = Phase::Training;
  int n = 4;
  TohState start;
  TohState target;
  std::optional<TohState> subgoal;
  std::vector<MoveRecord> moves;
  int m_min = 0;
  int m_allowed = 0;
  int m_used = 0;
  bool solved = false;
  ScoreBreakdown score;
  double pct = 0.0;

  /// Final board state (start when no move was made).
  const TohState& final_state() const { return moves.empty() ? start : moves.back().post; }
};

nlohmann::json to_json(const TrajectoryRecord& record);
/// Throws ParseError on missing or malformed fields.
TrajectoryRecord record_from_json(const nlohmann::json& j);

void write_jsonl(std::ostream& out, const std::vector<TrajectoryRecord>& records);
void write_jsonl(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> read_jsonl(std::istream& in);
/// Throws IoError when the file cannot be opened.
std::vector<TrajectoryRecord> read_jsonl(const std::filesystem::path& path);

/// Counters recomputed from the raw move list: labels shown, feedback
/// requests and sub-goal visits.
ScoreInputs score_inputs_from_moves(const TrajectoryRecord& record);

/// Score and percentage recomputed from the raw moves.
ScoreBreakdown rescore(const TrajectoryRecord& record);

/// Throws InvalidState when moves do not chain, are illegal, or counters
/// disagree with the move list.
void validate_record(const TrajectoryRecord& record);

/// Keeps records whose trial index (within its phase) lies in [first, last].
std::vector<TrajectoryRecord> filter_trials(const std::vector<TrajectoryRecord>& records,
                                            int first, int last);
std::vector<TrajectoryRecord> filter_solved(const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> filter_phase(const std::vector<TrajectoryRecord>& records, Phase p);
std::vector<TrajectoryRecord> filter_condition(const std::vector<TrajectoryRecord>& records,
                                               Condition c);

/// Trial index counted from 1 within the record's phase.
int trial_in_phase(const TrajectoryRecord& record, int training_trials = 10);

}  // namespace tohfb

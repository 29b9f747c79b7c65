#pragma once
// Experiment sessions: protocol sequencing over 10 training and 5 transfer
// trials, move adjudication, per-condition feedback, append-only JSONL
// persistence and summary statistics. Transport-agnostic; the HTTP layer
// maps these calls onto routes.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tohfb/errors.hpp"
#include "tohfb/feedback.hpp"
#include "tohfb/random.hpp"
#include "tohfb/trajectory.hpp"

namespace tohfb::service {

inline constexpr int kTrainingTrials = 10;
inline constexpr int kTransferTrials = 5;
inline constexpr int kTotalTrials = kTrainingTrials + kTransferTrials;
inline constexpr int kTrainingDisks = 4;
inline constexpr int kTransferDisks = 5;

struct TrialPlan {
  int trial_index = 1;
  Phase phase = Phase::Training;
  Condition effective = Condition::NoFeedback;  // NoFeedback on transfer trials
  int n = kTrainingDisks;
  TohState start;
  TohState target;
  std::optional<TohState> subgoal;
  int m_min = 0;
  int m_allowed = 0;
  int max_score = 0;
};

Phase phase_of_trial(int trial_index);
Condition effective_condition(Condition condition, Phase phase);
/// Plans one trial: start on peg 0, target uniform over T2 and T3.
TrialPlan plan_trial(Condition condition, int trial_index, Rng& rng);
nlohmann::json to_json(const TrialPlan& plan);

enum class SessionStatus { Active, Finished, Expired };
std::string_view to_string(SessionStatus s);

struct ServiceOptions {
  std::filesystem::path data_dir;  // empty disables persistence
  std::chrono::milliseconds time_limit = std::chrono::minutes(90);
  std::function<std::int64_t()> clock;  // ms; steady clock when unset
  std::uint64_t seed = 0;               // seeds sessions created without one
};

/// Thread-safe; requests on one session are serialized, distinct sessions
/// proceed concurrently. Every method returns the JSON body of its route.
/// Errors are tohfb::Error with service codes (SessionNotFound,
/// SessionExpired, IllegalMove, TrialNotActive, WrongCondition, NoMoveYet,
/// TrialInProgress, InvalidCondition).
class SessionManager {
 public:
  explicit SessionManager(ServiceOptions options = {});
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  nlohmann::json create_session(std::string_view condition, std::optional<std::uint64_t> seed = {});
  nlohmann::json session_view(const std::string& id);
  nlohmann::json submit_move(const std::string& id, int from, int to);
  nlohmann::json request_feedback(const std::string& id);
  nlohmann::json advance(const std::string& id);
  nlohmann::json stats(std::optional<std::string> condition, std::optional<std::string> phase);

  /// Completed records of one session in trial order.
  std::vector<TrajectoryRecord> records(const std::string& id);
  /// All completed records, including those loaded from data_dir.
  std::vector<TrajectoryRecord> all_records();

  const std::filesystem::path& data_dir() const { return options_.data_dir; }

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id);
  std::int64_t now() const;
  void check_expiry(Session& s);
  void start_trial(Session& s);
  void finish_trial(Session& s, bool solved);
  nlohmann::json view(const Session& s) const;
  nlohmann::json trial_view(const Session& s) const;
  void append(const std::filesystem::path& file, const nlohmann::json& line);

  ServiceOptions options_;
  std::mutex mutex_;  // guards sessions_, archive_ and the id counter
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::vector<TrajectoryRecord> archive_;
  std::uint64_t counter_ = 0;
  std::mutex file_mutex_;
};

/// HTTP status for a service error code.
int http_status(ErrorCode code);

}  // namespace tohfb::service

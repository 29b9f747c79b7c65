#include "tohfb/toh.hpp"

#include <array>
#include <deque>
#include <map>
#include <mutex>

#include "json.hpp"
#include "tohfb/errors.hpp"

namespace tohfb {

namespace {

std::size_t pow3(int n) {
  std::size_t p = 1;
  for (int i = 0; i < n; ++i) p *= 3;
  return p;
}

// Smallest disk on each peg, or n when the peg is empty.
std::array<int, kPegs> top_disks(std::span<const std::uint8_t> digits) {
  const int n = static_cast<int>(digits.size());
  std::array<int, kPegs> top{n, n, n};
  for (int i = n - 1; i >= 0; --i) top[digits[static_cast<std::size_t>(i)]] = i;
  return top;
}

}  // namespace

TohState::TohState(std::vector<std::uint8_t> digits) : digits_(std::move(digits)) {
  if (digits_.empty()) fail(ErrorCode::InvalidState, "state needs at least one disk");
  if (digits_.size() > static_cast<std::size_t>(kMaxDisks))
    fail(ErrorCode::LimitExceeded, "state has more than 12 disks");
  for (auto d : digits_)
    if (d >= kPegs) fail(ErrorCode::InvalidState, "peg index out of range");
}

TohState TohState::parse(std::string_view text) {
  if (text.empty()) fail(ErrorCode::InvalidState, "empty state string");
  std::vector<std::uint8_t> digits;
  digits.reserve(text.size());
  for (char c : text) {
    if (c < '0' || c > '2')
      fail(ErrorCode::InvalidState, "state must match ^[0-2]+$: '" + std::string(text) + "'");
    digits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return TohState(std::move(digits));
}

TohState TohState::parse(std::string_view text, int n) {
  TohState s = parse(text);
  if (s.disks() != n)
    fail(ErrorCode::InvalidState,
         "state '" + std::string(text) + "' does not have " + std::to_string(n) + " disks");
  return s;
}

TohState TohState::uniform(int n, int peg) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "disk count must be positive");
  return TohState(std::vector<std::uint8_t>(static_cast<std::size_t>(n),
                                            static_cast<std::uint8_t>(peg)));
}

TohState TohState::from_index(std::size_t index, int n) {
  std::vector<std::uint8_t> digits(static_cast<std::size_t>(n));
  for (auto& d : digits) {
    d = static_cast<std::uint8_t>(index % 3);
    index /= 3;
  }
  return TohState(std::move(digits));
}

std::size_t TohState::index() const {
  std::size_t idx = 0;
  for (auto it = digits_.rbegin(); it != digits_.rend(); ++it) idx = idx * 3 + *it;
  return idx;
}

std::string TohState::str() const {
  std::string out(digits_.size(), '0');
  for (std::size_t i = 0; i < digits_.size(); ++i) out[i] = static_cast<char>('0' + digits_[i]);
  return out;
}

MoveAction make_move(int from, int to) {
  if (from < 0 || from >= kPegs || to < 0 || to >= kPegs || from == to)
    fail(ErrorCode::InvalidArgument,
         "invalid move " + std::to_string(from) + "->" + std::to_string(to));
  return MoveAction{from, to};
}

std::vector<Transition> legal_moves(const TohState& state) {
  const auto digits = state.digits();
  const auto top = top_disks(digits);
  const int n = state.disks();
  std::vector<Transition> out;
  out.reserve(3);
  for (int from = 0; from < kPegs; ++from) {
    if (top[from] == n) continue;
    for (int to = 0; to < kPegs; ++to) {
      if (to == from || top[to] < top[from]) continue;
      std::vector<std::uint8_t> next(digits.begin(), digits.end());
      next[static_cast<std::size_t>(top[from])] = static_cast<std::uint8_t>(to);
      out.push_back({MoveAction{from, to}, TohState(std::move(next))});
    }
  }
  return out;
}

TohState apply_move(const TohState& state, MoveAction move) {
  if (move.from < 0 || move.from >= kPegs || move.to < 0 || move.to >= kPegs ||
      move.from == move.to)
    fail(ErrorCode::IllegalMove, "malformed move");
  const auto top = top_disks(state.digits());
  const int n = state.disks();
  if (top[move.from] == n)
    fail(ErrorCode::IllegalMove, "peg " + std::to_string(move.from) + " is empty");
  if (top[move.to] < top[move.from])
    fail(ErrorCode::IllegalMove, "cannot place a larger disk on a smaller one");
  std::vector<std::uint8_t> next(state.digits().begin(), state.digits().end());
  next[static_cast<std::size_t>(top[move.from])] = static_cast<std::uint8_t>(move.to);
  return TohState(std::move(next));
}

std::string_view to_string(Triangle t) {
  switch (t) {
    case Triangle::T1: return "T1";
    case Triangle::T2: return "T2";
    case Triangle::T3: return "T3";
  }
  return "?";
}

Triangle triangle_of(const TohState& state) {
  switch (state.peg_of(state.disks() - 1)) {
    case 0: return Triangle::T1;
    case 2: return Triangle::T2;
    default: return Triangle::T3;
  }
}

TohState critical_entry_state(Triangle triangle, int n) {
  // Largest disk crosses 0 -> 2 with every smaller disk parked on peg 1,
  // and 0 -> 1 with every smaller disk on peg 2.
  if (triangle == Triangle::T1) fail(ErrorCode::NoEntry, "T1 is the start triangle");
  if (n < 1) fail(ErrorCode::InvalidArgument, "need at least one disk");
  const std::uint8_t parked = triangle == Triangle::T2 ? 1 : 2;
  const std::uint8_t largest = triangle == Triangle::T2 ? 2 : 1;
  std::vector<std::uint8_t> digits(static_cast<std::size_t>(n), parked);
  digits.back() = largest;
  return TohState(std::move(digits));
}

TohState critical_exit_state(Triangle triangle, int n) {
  if (triangle == Triangle::T1) fail(ErrorCode::NoEntry, "T1 is the start triangle");
  const TohState entry = critical_entry_state(triangle, n);
  std::vector<std::uint8_t> digits(entry.digits().begin(), entry.digits().end());
  digits.back() = 0;
  return TohState(std::move(digits));
}

namespace {

TohState corner(int n, int p, int a, int b) {
  std::vector<std::uint8_t> digits(static_cast<std::size_t>(n), static_cast<std::uint8_t>(p));
  digits[static_cast<std::size_t>(n - 2)] = static_cast<std::uint8_t>(a);
  digits[static_cast<std::size_t>(n - 1)] = static_cast<std::uint8_t>(b);
  return TohState(std::move(digits));
}

}  // namespace

std::vector<TohState> sub_triangle_corners(int n) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "sub-triangle corners need n >= 3");
  std::vector<TohState> out;
  out.reserve(27);
  for (int b = 0; b < kPegs; ++b)
    for (int a = 0; a < kPegs; ++a)
      for (int p = 0; p < kPegs; ++p) out.push_back(corner(n, p, a, b));
  return out;
}

std::vector<TohState> subset8_states(int n) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "the 8-state feature set needs n >= 3");
  // (p, a, b) for p..p a b: the two free corners of T1's top sub-triangle,
  // T1's two critical states, then the free corners of the T2 and T3 entry
  // sub-triangles.
  static constexpr std::array<std::array<int, 3>, 8> kPattern{{{2, 0, 0},
                                                               {1, 0, 0},
                                                               {1, 1, 0},
                                                               {2, 2, 0},
                                                               {0, 1, 2},
                                                               {2, 1, 2},
                                                               {1, 2, 1},
                                                               {0, 2, 1}}};
  std::vector<TohState> out;
  out.reserve(8);
  for (const auto& [p, a, b] : kPattern) out.push_back(corner(n, p, a, b));
  return out;
}

std::size_t StateGraph::index_of(const TohState& state) const {
  if (state.disks() != n_)
    fail(ErrorCode::UnknownState, "state '" + state.str() + "' is not in the " +
                                      std::to_string(n_) + "-disk graph");
  return state.index();
}

std::size_t StateGraph::find_edge(std::size_t from, std::size_t to) const {
  for (std::size_t e = offsets_[from]; e < offsets_[from + 1]; ++e)
    if (edges_[e].next == to) return e;
  return npos;
}

GraphPtr build_state_graph(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "disk count must be positive");
  if (n > kMaxDisks)
    fail(ErrorCode::LimitExceeded, "graph enumeration is limited to 12 disks");
  auto g = std::make_shared<StateGraph>();
  g->n_ = n;
  const std::size_t count = pow3(n);
  g->offsets_.assign(count + 1, 0);
  g->triangle_.resize(count);
  g->sub_triangle_.resize(count);
  g->edges_.reserve(count * 3);
  g->source_.reserve(count * 3);

  std::vector<std::size_t> weight(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) weight[static_cast<std::size_t>(i)] = pow3(i);

  std::vector<std::uint8_t> digits(static_cast<std::size_t>(n));
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t rest = idx;
    for (auto& d : digits) {
      d = static_cast<std::uint8_t>(rest % 3);
      rest /= 3;
    }
    const auto top = top_disks(digits);
    g->offsets_[idx] = g->edges_.size();
    for (int from = 0; from < kPegs; ++from) {
      if (top[from] == n) continue;
      const auto disk = static_cast<std::size_t>(top[from]);
      for (int to = 0; to < kPegs; ++to) {
        if (to == from || top[to] < top[from]) continue;
        const std::size_t next = idx + static_cast<std::size_t>(to) * weight[disk] -
                                 static_cast<std::size_t>(from) * weight[disk];
        g->edges_.push_back({MoveAction{from, to}, static_cast<std::uint32_t>(next)});
        g->source_.push_back(idx);
      }
    }
    const int last = digits.back();
    g->triangle_[idx] = last == 0 ? Triangle::T1 : (last == 2 ? Triangle::T2 : Triangle::T3);
    g->sub_triangle_[idx] = n >= 2 ? 3 * last + digits[static_cast<std::size_t>(n - 2)] : -1;
  }
  g->offsets_[count] = g->edges_.size();
  return g;
}

GraphPtr shared_graph(int n) {
  static std::mutex mutex;
  static std::map<int, GraphPtr> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = build_state_graph(n);
  return slot;
}

std::vector<int> shortest_distances(const StateGraph& graph, const TohState& target) {
  return shortest_distances(graph, graph.index_of(target));
}

std::vector<int> shortest_distances(const StateGraph& graph, std::size_t target) {
  if (target >= graph.num_states()) fail(ErrorCode::UnknownState, "target index out of range");
  std::vector<int> dist(graph.num_states(), -1);
  std::deque<std::size_t> frontier{target};
  dist[target] = 0;
  while (!frontier.empty()) {
    const auto s = frontier.front();
    frontier.pop_front();
    for (const auto& e : graph.edges(s)) {
      if (dist[e.next] >= 0) continue;
      dist[e.next] = dist[s] + 1;
      frontier.push_back(e.next);
    }
  }
  return dist;
}

std::string graph_to_json(const StateGraph& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t s = 0; s < graph.num_states(); ++s) {
    nlohmann::json next = nlohmann::json::array();
    for (const auto& e : graph.edges(s))
      next.push_back({{"from", e.action.from}, {"to", e.action.to}, {"state", graph.label(e.next)}});
    nodes.push_back({{"state", graph.label(s)},
                     {"triangle", std::string(to_string(graph.triangle(s)))},
                     {"next", std::move(next)}});
  }
  return nlohmann::json{{"n", graph.disks()}, {"nodes", std::move(nodes)}}.dump();
}

}  // namespace tohfb

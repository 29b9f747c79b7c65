#pragma once
// Tower of Hanoi combinatorics: states, legal moves, the full state graph,
// BFS distances and the recursive triangle geometry.

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tohfb {

inline constexpr int kPegs = 3;
inline constexpr int kMaxDisks = 12;

/// Disk configuration. Digit i is the peg (0..2) holding disk i, disks
/// numbered by ascending size, so the largest disk is the last digit.
/// Every digit string is a legal stacking.
class TohState {
 public:
  TohState() = default;
  explicit TohState(std::vector<std::uint8_t> digits);

  /// Parses the canonical digit string, e.g. "2201". Throws InvalidState.
  static TohState parse(std::string_view text);
  /// Parses and checks the disk count.
  static TohState parse(std::string_view text, int n);
  static TohState uniform(int n, int peg);
  static TohState from_index(std::size_t index, int n);

  int disks() const { return static_cast<int>(digits_.size()); }
  int peg_of(int disk) const { return digits_[static_cast<std::size_t>(disk)]; }
  std::span<const std::uint8_t> digits() const { return digits_; }

  /// Base-3 index with disk i weighted 3^i.
  std::size_t index() const;
  std::string str() const;

  auto operator<=>(const TohState&) const = default;
  bool operator==(const TohState&) const = default;

 private:
  std::vector<std::uint8_t> digits_;
};

struct MoveAction {
  int from = 0;
  int to = 0;

  auto operator<=>(const MoveAction&) const = default;
  bool operator==(const MoveAction&) const = default;
};

/// Throws InvalidArgument unless both pegs are in range and distinct.
MoveAction make_move(int from, int to);

struct Transition {
  MoveAction action;
  TohState next;
};

/// Every legal move from `state`, sorted by (from, to). Size is 2 or 3.
std::vector<Transition> legal_moves(const TohState& state);

/// Throws IllegalMove when the source peg is empty or the moved disk would
/// cover a smaller one.
TohState apply_move(const TohState& state, MoveAction move);

enum class Triangle { T1, T2, T3 };

std::string_view to_string(Triangle t);

/// T1 when the largest disk is on peg 0, T2 on peg 2, T3 on peg 1.
Triangle triangle_of(const TohState& state);

/// The state inside T2/T3 that is adjacent to T1 ("1..12" and "2..21").
/// Throws NoEntry for T1.
TohState critical_entry_state(Triangle triangle, int n);

/// The T1 side of the bridge into `triangle` ("1..10" or "2..20").
TohState critical_exit_state(Triangle triangle, int n);

/// All 27 corner states p..p a b of the level-2 sub-triangles (n >= 3),
/// ordered by (b, a, p).
std::vector<TohState> sub_triangle_corners(int n);

/// The sparse 8-state feature set. For n = 4 this is
/// 2200, 1100, 1110, 2220, 0012, 2212, 1121, 0021; other n follow the same
/// corner pattern with the leading run of equal digits stretched.
std::vector<TohState> subset8_states(int n);

struct Edge {
  MoveAction action;
  std::uint32_t next = 0;
};

/// Immutable adjacency over all 3^n states in compressed row form. Edge
/// order within a row follows legal_moves.
class StateGraph {
 public:
  int disks() const { return n_; }
  std::size_t num_states() const { return triangle_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  std::span<const Edge> edges(std::size_t state) const {
    return {edges_.data() + offsets_[state], offsets_[state + 1] - offsets_[state]};
  }
  std::size_t edge_begin(std::size_t state) const { return offsets_[state]; }
  std::size_t edge_end(std::size_t state) const { return offsets_[state + 1]; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }
  std::size_t source_of(std::size_t e) const { return source_[e]; }
  std::span<const std::size_t> offsets() const { return offsets_; }

  /// Throws UnknownState when the disk count does not match.
  std::size_t index_of(const TohState& state) const;
  TohState state(std::size_t index) const { return TohState::from_index(index, n_); }
  std::string label(std::size_t index) const { return state(index).str(); }

  Triangle triangle(std::size_t index) const { return triangle_[index]; }
  /// Sub-triangle key (largest disk peg, second largest disk peg) packed as
  /// 3 * s[n-1] + s[n-2]; -1 when n < 2.
  int sub_triangle(std::size_t index) const { return sub_triangle_[index]; }

  /// Edge index of the move s -> t, or npos when not adjacent.
  std::size_t find_edge(std::size_t from, std::size_t to) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  friend std::shared_ptr<const StateGraph> build_state_graph(int n);

  int n_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> source_;
  std::vector<Triangle> triangle_;
  std::vector<int> sub_triangle_;
};

using GraphPtr = std::shared_ptr<const StateGraph>;

/// Throws LimitExceeded for n > kMaxDisks and InvalidArgument for n < 1.
GraphPtr build_state_graph(int n);

/// Cached graph for small n, shared across callers.
GraphPtr shared_graph(int n);

/// BFS hop counts to `target`, indexed by state index.
std::vector<int> shortest_distances(const StateGraph& graph, const TohState& target);
std::vector<int> shortest_distances(const StateGraph& graph, std::size_t target);

/// Adjacency JSON: {"n": .., "nodes": [{"state": "0000", "next": [...]}, ...]}.
std::string graph_to_json(const StateGraph& graph);

}  // namespace tohfb

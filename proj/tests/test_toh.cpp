#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "doctest.h"
#include "tohfb/errors.hpp"
#include "tohfb/toh.hpp"

using namespace tohfb;

namespace {

// Independent rule check: disk i may move when no smaller disk shares its
// peg, onto a peg holding no smaller disk.
bool legal_by_rules(const TohState& s, int disk, int to) {
  const int from = s.peg_of(disk);
  if (from == to) return false;
  for (int d = 0; d < disk; ++d)
    if (s.peg_of(d) == from || s.peg_of(d) == to) return false;
  return true;
}

int recursive_distance(int n) { return n == 0 ? 0 : 2 * recursive_distance(n - 1) + 1; }

std::vector<int> bfs_oracle(int n, const TohState& target) {
  const auto g = build_state_graph(n);
  std::vector<int> d(g->num_states(), -1);
  std::deque<TohState> q{target};
  d[target.index()] = 0;
  while (!q.empty()) {
    const auto s = q.front();
    q.pop_front();
    for (const auto& t : legal_moves(s))
      if (d[t.next.index()] < 0) {
        d[t.next.index()] = d[s.index()] + 1;
        q.push_back(t.next);
      }
  }
  return d;
}

}  // namespace

TEST_CASE("state text round trip and index") {
  for (std::size_t i = 0; i < 81; ++i) {
    const auto s = TohState::from_index(i, 4);
    CHECK(TohState::parse(s.str()) == s);
    CHECK(s.index() == i);
  }
  CHECK(TohState::parse("2201").peg_of(0) == 2);
  CHECK(TohState::parse("2201").peg_of(3) == 1);
  CHECK_THROWS_AS(TohState::parse("0130"), Error);
  CHECK_THROWS_AS(TohState::parse(""), Error);
  CHECK_THROWS_AS(TohState::parse("000", 4), Error);
}

TEST_CASE("legal moves on small states") {
  const auto m = legal_moves(TohState::parse("0000"));
  REQUIRE(m.size() == 2);
  CHECK(m[0].action == MoveAction{0, 1});
  CHECK(m[0].next.str() == "1000");
  CHECK(m[1].action == MoveAction{0, 2});
  CHECK(m[1].next.str() == "2000");

  const auto m2 = legal_moves(TohState::parse("1000"));
  REQUIRE(m2.size() == 3);
  std::set<std::string> next;
  for (const auto& t : m2) next.insert(t.next.str());
  CHECK(next == std::set<std::string>{"0000", "2000", "1200"});
}

TEST_CASE("legal moves agree with the placement rules") {
  for (std::size_t i = 0; i < 243; ++i) {
    const auto s = TohState::from_index(i, 5);
    std::set<std::string> expect;
    for (int disk = 0; disk < 5; ++disk)
      for (int to = 0; to < 3; ++to)
        if (legal_by_rules(s, disk, to)) {
          auto d = std::vector<std::uint8_t>(s.digits().begin(), s.digits().end());
          d[static_cast<std::size_t>(disk)] = static_cast<std::uint8_t>(to);
          expect.insert(TohState(d).str());
        }
    std::set<std::string> got;
    const auto moves = legal_moves(s);
    for (const auto& t : moves) got.insert(t.next.str());
    CHECK(got == expect);
    CHECK(std::is_sorted(moves.begin(), moves.end(),
                         [](const Transition& a, const Transition& b) { return a.action < b.action; }));
  }
}

TEST_CASE("exactly the uniform states have two moves") {
  int two = 0;
  for (std::size_t i = 0; i < 81; ++i) {
    const auto s = TohState::from_index(i, 4);
    const auto k = legal_moves(s).size();
    CHECK((k == 2 || k == 3));
    if (k == 2) {
      ++two;
      const auto d = s.digits();
      CHECK(std::all_of(d.begin(), d.end(), [&](auto x) { return x == d[0]; }));
    }
  }
  CHECK(two == 3);
}

TEST_CASE("apply_move") {
  CHECK(apply_move(TohState::parse("0000"), {0, 2}).str() == "2000");
  CHECK(apply_move(TohState::parse("2000"), {2, 0}).str() == "0000");
  CHECK_THROWS_AS(apply_move(TohState::parse("0000"), {1, 2}), Error);
  try {
    apply_move(TohState::parse("1000"), {0, 1});
    FAIL("expected IllegalMove");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllegalMove);
  }
  CHECK_THROWS_AS(make_move(1, 1), Error);
  CHECK_THROWS_AS(make_move(0, 3), Error);
}

TEST_CASE("graph sizes and structure") {
  CHECK(build_state_graph(4)->num_states() == 81);
  CHECK(build_state_graph(5)->num_states() == 243);
  const auto g1 = build_state_graph(1);
  CHECK(g1->num_states() == 3);
  for (std::size_t s = 0; s < 3; ++s) CHECK(g1->edges(s).size() == 2);
  CHECK_THROWS_AS(build_state_graph(kMaxDisks + 1), Error);
  CHECK_THROWS_AS(build_state_graph(0), Error);
  try {
    build_state_graph(13);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LimitExceeded);
  }

  std::size_t size = 1;
  for (int n = 1; n <= 7; ++n) {
    size *= 3;
    const auto g = build_state_graph(n);
    CHECK(g->num_states() == size);
    int deg2 = 0;
    for (std::size_t s = 0; s < g->num_states(); ++s) {
      const auto d = g->edges(s).size();
      CHECK((d == 2 || d == 3));
      deg2 += d == 2;
      // Every move is reversible.
      for (const auto& e : g->edges(s)) CHECK(g->find_edge(e.next, s) != StateGraph::npos);
    }
    CHECK(deg2 == 3);
  }
}

TEST_CASE("bridges between triangles") {
  for (int n = 2; n <= 6; ++n) {
    const auto g = build_state_graph(n);
    std::map<std::pair<Triangle, Triangle>, int> cross;
    for (std::size_t e = 0; e < g->num_edges(); ++e) {
      const auto a = g->triangle(g->source_of(e));
      const auto b = g->triangle(g->edge(e).next);
      if (a != b) ++cross[{a, b}];
    }
    CHECK(cross.size() == 6);
    for (const auto& [k, v] : cross) CHECK(v == 1);
  }
}

TEST_CASE("removing the bridges leaves three triangles of 3^(n-1) states") {
  const int n = 4;
  const auto g = build_state_graph(n);
  std::vector<int> comp(g->num_states(), -1);
  int c = 0;
  for (std::size_t s0 = 0; s0 < g->num_states(); ++s0) {
    if (comp[s0] >= 0) continue;
    std::deque<std::size_t> q{s0};
    comp[s0] = c;
    while (!q.empty()) {
      const auto s = q.front();
      q.pop_front();
      for (const auto& e : g->edges(s))
        if (g->triangle(e.next) == g->triangle(s) && comp[e.next] < 0) {
          comp[e.next] = c;
          q.push_back(e.next);
        }
    }
    ++c;
  }
  CHECK(c == 3);
  for (int k = 0; k < 3; ++k) CHECK(std::count(comp.begin(), comp.end(), k) == 27);
  for (std::size_t s = 0; s < g->num_states(); ++s)
    CHECK(comp[s] == comp[g->index_of(TohState::uniform(n, g->state(s).peg_of(n - 1)))]);
}

TEST_CASE("shortest distances") {
  const auto g = shared_graph(4);
  const auto d = shortest_distances(*g, TohState::parse("2222"));
  CHECK(d[g->index_of(TohState::parse("2222"))] == 0);
  CHECK(d[g->index_of(TohState::parse("0000"))] == 15);
  CHECK(d == bfs_oracle(4, TohState::parse("2222")));
  for (int n = 2; n <= 7; ++n) {
    const auto gn = build_state_graph(n);
    const auto dn = shortest_distances(*gn, TohState::uniform(n, 2));
    CHECK(dn[gn->index_of(TohState::uniform(n, 0))] == recursive_distance(n));
    CHECK(dn[gn->index_of(TohState::uniform(n, 0))] == (1 << n) - 1);
  }
  // Adjacent states differ by at most one, and some neighbors tie.
  bool tie = false;
  for (std::size_t s = 0; s < g->num_states(); ++s)
    for (const auto& e : g->edges(s)) {
      CHECK(std::abs(d[s] - d[e.next]) <= 1);
      tie = tie || d[s] == d[e.next];
    }
  CHECK(tie);
  CHECK_THROWS_AS(shortest_distances(*g, TohState::parse("222")), Error);
}

TEST_CASE("triangles and critical states") {
  CHECK(triangle_of(TohState::parse("1112")) == Triangle::T2);
  CHECK(triangle_of(TohState::parse("2221")) == Triangle::T3);
  CHECK(triangle_of(TohState::parse("0000")) == Triangle::T1);
  CHECK(critical_entry_state(Triangle::T2, 4).str() == "1112");
  CHECK(critical_entry_state(Triangle::T3, 4).str() == "2221");
  CHECK(critical_exit_state(Triangle::T2, 4).str() == "1110");
  CHECK(critical_exit_state(Triangle::T3, 4).str() == "2220");
  CHECK_THROWS_AS(critical_entry_state(Triangle::T1, 4), Error);

  // n = 5 by bridge search in the 243-state graph.
  const auto g = shared_graph(5);
  for (Triangle t : {Triangle::T2, Triangle::T3}) {
    std::vector<std::string> entries;
    for (std::size_t e = 0; e < g->num_edges(); ++e)
      if (g->triangle(g->source_of(e)) == Triangle::T1 && g->triangle(g->edge(e).next) == t)
        entries.push_back(g->label(g->edge(e).next));
    REQUIRE(entries.size() == 1);
    CHECK(critical_entry_state(t, 5).str() == entries[0]);
  }
  CHECK(critical_entry_state(Triangle::T2, 5).str() == "11112");
}

TEST_CASE("sub-triangle corners and the sparse feature set") {
  const auto corners = sub_triangle_corners(4);
  CHECK(corners.size() == 27);
  std::set<std::string> names;
  for (const auto& c : corners) {
    names.insert(c.str());
    CHECK(c.peg_of(0) == c.peg_of(1));
  }
  for (const char* s : {"2200", "1100", "1110", "2220", "0012", "2212", "1121", "0021"}) CHECK(names.count(s) == 1);

  std::vector<std::string> sub8;
  for (const auto& s : subset8_states(4)) sub8.push_back(s.str());
  CHECK(sub8 == std::vector<std::string>{"2200", "1100", "1110", "2220", "0012", "2212", "1121", "0021"});
  const auto five = subset8_states(5);
  CHECK(five.size() == 8);
  for (const auto& s : five) CHECK((s.peg_of(0) == s.peg_of(1) && s.peg_of(1) == s.peg_of(2)));
}

TEST_CASE("sub-triangle keys") {
  const auto g = shared_graph(4);
  CHECK(g->sub_triangle(g->index_of(TohState::parse("0012"))) == 3 * 2 + 1);
  CHECK(g->sub_triangle(g->index_of(TohState::parse("2221"))) == 3 * 1 + 2);
  std::map<int, int> counts;
  for (std::size_t s = 0; s < g->num_states(); ++s) ++counts[g->sub_triangle(s)];
  CHECK(counts.size() == 9);
  for (const auto& [k, v] : counts) CHECK(v == 9);
}

TEST_CASE("graph json lists every node") {
  const auto j = graph_to_json(*build_state_graph(2));
  CHECK(j.find("\"00\"") != std::string::npos);
  CHECK(j.find("\"22\"") != std::string::npos);
}
